#pragma once

#include <random>
#include <string>

#include "capp/capp.hpp"
#include "capp/synthetic.hpp"

namespace capp::test {

inline std::string source_path(const std::string& rel) { return std::string(CAPP_SOURCE_DIR) + "/" + rel; }

inline json seed_db_json() { return read_json_file(source_path("data/seed_osedb.json")); }
inline json seed_tools_json() { return read_json_file(source_path("data/seed_tools.json")); }
inline OSEDatabase seed_db() { return osedb_from_json(seed_db_json()); }
inline std::vector<CuttingSet> seed_tools() { return tools_from_json(seed_tools_json()); }

inline Inputs seed_inputs(Part part) {
  Inputs in;
  in.part = std::move(part);
  in.db = seed_db();
  in.tools = seed_tools();
  return in;
}

/// Uniformly distributed rotation from a normalised Gaussian quaternion.
inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Vec3 random_translation(std::mt19937_64& rng, double scale = 100.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace capp::test
