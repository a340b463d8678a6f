#include <catch_amalgamated.hpp>

#include <algorithm>
#include <limits>

#include "support/common.hpp"

using namespace capp;
using namespace capp::test;

namespace {

Grid unit_square(std::size_t n = 3) {
  return synthetic::sample(n, n, [](double u, double v) { return Point3(u, v, 0); });
}

Box3 direct_box(const std::vector<Point3>& pts) {
  Point3 lo = pts.front(), hi = pts.front();
  for (const auto& p : pts)
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  return {lo, hi};
}

}  // namespace

TEST_CASE("single planar face without adjacency is valid") {
  Part p{"p", "mm", {{"A", unit_square(), {}, {}}}};
  CHECK(validate_part(p).empty());
}

TEST_CASE("one-sided adjacency is reported as asymmetric") {
  Part p{"p", "mm", {{"A", unit_square(), {{"B", 90}}, {}}, {"B", unit_square(), {}, {}}}};
  auto v = validate_part(p);
  REQUIRE(v.size() == 1);
  CHECK(v[0].face == "A");
  CHECK(v[0].reason.find("asymmetric adjacency") != std::string::npos);
}

TEST_CASE("non-finite coordinate is reported once") {
  Part p{"p", "mm", {{"A", unit_square(), {}, {}}}};
  p.faces[0].grid(1, 1).z() = std::numeric_limits<double>::quiet_NaN();
  auto v = validate_part(p);
  REQUIRE(v.size() == 1);
  CHECK(v[0].reason == "non-finite coordinate");
}

TEST_CASE("structural violations are reported") {
  SECTION("duplicate ids") {
    Part p{"p", "mm", {{"A", unit_square(), {}, {}}, {"A", unit_square(), {}, {}}}};
    CHECK(validate_part(p) == std::vector<Violation>{{"A", "duplicate face id"}});
  }
  SECTION("empty part") {
    Part p{"p", "mm", {}};
    CHECK(validate_part(p) == std::vector<Violation>{{"", "part has no faces"}});
  }
  SECTION("units") {
    Part p{"p", "in", {{"A", unit_square(), {}, {}}}};
    CHECK(validate_part(p) == std::vector<Violation>{{"", "units must be \"mm\""}});
  }
  SECTION("grid too small") {
    Part p{"p", "mm", {{"A", Grid(1, 4), {}, {}}}};
    CHECK(validate_part(p) == std::vector<Violation>{{"A", "grid smaller than 2x2"}});
  }
  SECTION("material angle bounds") {
    for (double bad : {0.0, 360.0, -5.0}) {
      Part p{"p", "mm", {{"A", unit_square(), {{"B", bad}}, {}}, {"B", unit_square(), {{"A", bad}}, {}}}};
      CHECK(validate_part(p).size() == 2);
    }
  }
  SECTION("unresolved and self references") {
    Part p{"p", "mm", {{"A", unit_square(), {{"Z", 90}, {"A", 90}}, {}}}};
    auto v = validate_part(p);
    REQUIRE(v.size() == 2);
    CHECK(v[0].reason == "face lists itself as adjacent");
    CHECK(std::count_if(v.begin(), v.end(), [](const Violation& x) {
            return x.reason.find("unresolved adjacency Z") != std::string::npos;
          }) == 1);
  }
  SECTION("mismatched material angles") {
    Part p{"p", "mm", {{"A", unit_square(), {{"B", 90}}, {}}, {"B", unit_square(), {{"A", 270}}, {}}}};
    CHECK(validate_part(p).size() == 2);
  }
}

TEST_CASE("shipped fixtures are valid") {
  for (const auto& f : synthetic::shipped_fixtures()) {
    INFO(f.file);
    CHECK(validate_part(f.part).empty());
  }
}

TEST_CASE("validate_part is idempotent and independent of face order") {
  std::mt19937_64 rng(7);
  Part p = synthetic::carter();
  p.faces[3].adjacency.erase(p.faces[3].adjacency.begin());
  p.faces[5].grid(0, 0).x() = std::numeric_limits<double>::infinity();
  p.faces.push_back(p.faces[7]);
  const auto reference = validate_part(p);
  CHECK(reference.size() >= 3);
  CHECK(validate_part(p) == reference);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(p.faces.begin(), p.faces.end(), rng);
    CHECK(validate_part(p) == reference);
  }
}

TEST_CASE("bounding box of a unit square") {
  SampledFace f{"A", unit_square(), {}, {}};
  auto b = bounding_box(f);
  CHECK(b.min == Point3(0, 0, 0));
  CHECK(b.max == Point3(1, 1, 0));
}

TEST_CASE("bounding box of two stacked cubes spans both") {
  Part lower = synthetic::block(1, 1, 1, "lower");
  Part upper = synthetic::moved(synthetic::block(1, 1, 1, "upper"), Eigen::Matrix3d::Identity(), Vec3(0, 0, 1));
  Part both{"stack", "mm", {}};
  for (auto f : lower.faces) {
    f.id = "l-" + f.id;
    f.adjacency.clear();
    both.faces.push_back(f);
  }
  for (auto f : upper.faces) {
    f.id = "u-" + f.id;
    f.adjacency.clear();
    both.faces.push_back(f);
  }
  auto b = bounding_box(both);
  CHECK(b.min == Point3(0, 0, 0));
  CHECK(b.max == Point3(1, 1, 2));
}

TEST_CASE("bounding box of rotated grids equals direct min/max") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    Part p = synthetic::moved(synthetic::one_of_each(), random_rotation(rng), random_translation(rng));
    std::vector<Point3> all;
    for (const auto& f : p.faces) {
      CHECK(bounding_box(f) == direct_box(f.grid.points()));
      all.insert(all.end(), f.grid.points().begin(), f.grid.points().end());
    }
    CHECK(bounding_box(p) == direct_box(all));
  }
}

TEST_CASE("part box contains every face box") {
  std::mt19937_64 rng(13);
  for (const auto& fx : synthetic::shipped_fixtures()) {
    Part p = synthetic::moved(fx.part, random_rotation(rng), random_translation(rng));
    const auto box = bounding_box(p);
    for (const auto& f : p.faces) CHECK(box.contains(bounding_box(f)));
  }
}

TEST_CASE("translation shifts both box corners by t") {
  std::mt19937_64 rng(17);
  const Part p = synthetic::carter();
  const auto box = bounding_box(p);
  for (int i = 0; i < 20; ++i) {
    Vec3 t = random_translation(rng, 1000.0);
    auto moved = bounding_box(synthetic::moved(p, Eigen::Matrix3d::Identity(), t));
    CHECK(moved.min == Point3(box.min + t));
    CHECK(moved.max == Point3(box.max + t));
  }
}

TEST_CASE("adjacency graph is undirected") {
  auto g = adjacency_graph(synthetic::carter());
  CHECK(g.size() == 24);
  for (const auto& [a, ns] : g)
    for (const auto& b : ns) CHECK(g.at(b).count(a) == 1);
}
