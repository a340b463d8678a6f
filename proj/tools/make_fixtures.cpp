#include <filesystem>
#include <fstream>
#include <iostream>

#include "capp/json_io.hpp"
#include "capp/synthetic.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data/parts";
  std::filesystem::create_directories(dir);
  for (const auto& f : capp::synthetic::shipped_fixtures()) {
    std::ofstream out(dir / f.file, std::ios::binary | std::ios::trunc);
    if (!out) {
      std::cerr << "cannot write " << (dir / f.file) << "\n";
      return 1;
    }
    out << capp::to_json(f.part).dump(1) << "\n";
    std::cout << (dir / f.file).string() << ": " << f.part.faces.size() << " faces\n";
  }
  return 0;
}
