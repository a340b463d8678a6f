#include "capp/cli.hpp"

int main(int argc, char** argv) { return capp::cli::run(argc, argv); }
