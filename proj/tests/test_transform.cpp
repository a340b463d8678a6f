#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "support/common.hpp"

using namespace capp;
using namespace capp::test;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

/// Smallest eigenvalue of a symmetric 3x3 matrix by the trigonometric
/// solution of its characteristic cubic.
double smallest_eigenvalue(const Eigen::Matrix3d& A) {
  const double p1 = A(0, 1) * A(0, 1) + A(0, 2) * A(0, 2) + A(1, 2) * A(1, 2);
  const double q = A.trace() / 3.0;
  const double p2 = std::pow(A(0, 0) - q, 2) + std::pow(A(1, 1) - q, 2) + std::pow(A(2, 2) - q, 2) + 2 * p1;
  const double p = std::sqrt(p2 / 6.0);
  if (p == 0.0) return q;
  const Eigen::Matrix3d B = (A - q * Eigen::Matrix3d::Identity()) / p;
  const double r = std::clamp(B.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  return q + 2 * p * std::cos(phi + 2.0 * synthetic::kPi / 3.0);
}

/// Circle centre and radius in the xy projection: algebraic fit followed by
/// Gauss-Newton on the geometric distances.
std::pair<Eigen::Vector2d, double> circle_fit(const std::vector<Point3>& pts) {
  Eigen::MatrixXd A(pts.size(), 3);
  Eigen::VectorXd b(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    A(i, 0) = pts[i].x();
    A(i, 1) = pts[i].y();
    A(i, 2) = 1.0;
    b(i) = pts[i].x() * pts[i].x() + pts[i].y() * pts[i].y();
  }
  Eigen::Vector3d s = A.colPivHouseholderQr().solve(b);
  Eigen::Vector2d c(s(0) / 2, s(1) / 2);
  double r = std::sqrt(s(2) + c.squaredNorm());
  for (int it = 0; it < 50; ++it) {
    Eigen::MatrixXd J(pts.size(), 3);
    Eigen::VectorXd res(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      Eigen::Vector2d d(pts[i].x() - c.x(), pts[i].y() - c.y());
      double n = d.norm();
      res(i) = n - r;
      J(i, 0) = -d.x() / n;
      J(i, 1) = -d.y() / n;
      J(i, 2) = -1.0;
    }
    Eigen::Vector3d step = J.colPivHouseholderQr().solve(-res);
    c += step.head<2>();
    r += step(2);
    if (step.norm() < 1e-14) break;
  }
  return {c, r};
}

SampledFace face_of(const Grid& g, const std::string& id = "f") { return {id, g, {}, {}}; }

std::set<MfgType> mfg_set(const FaceAttributes& a) { return {a.potential_mfg_types.begin(), a.potential_mfg_types.end()}; }

bool has_direction(const FaceAttributes& a, const Vec3& d) {
  for (const auto& ad : a.access)
    if (ad.direction.dot(d) > 1.0 - 1e-9) return true;
  return false;
}

}  // namespace

// ---------------------------------------------------------------- fitting

TEST_CASE("plane fit on z = 0") {
  auto g = synthetic::sample(3, 3, [](double u, double v) { return Point3(u, v, 0); });
  auto f = fit_plane(g);
  CHECK_THAT(std::abs(f.normal.z()), WithinAbs(1.0, 1e-12));
  CHECK_THAT(f.rms_residual, WithinAbs(0.0, 1e-12));
}

TEST_CASE("plane fit on x + y + z = 1") {
  auto g = synthetic::sample(4, 5, [](double u, double v) { return Point3(u, v, 1 - u - v); });
  auto f = fit_plane(g);
  CHECK_THAT(std::abs(f.normal.dot(Vec3(1, 1, 1).normalized())), WithinAbs(1.0, 1e-12));
  CHECK(f.rms_residual < 1e-9);
}

TEST_CASE("plane fit residual matches the closed-form covariance eigenvalue") {
  auto g = synthetic::sample(5, 7, [](double u, double v) { return Point3(10 * u, 6 * v, 0); });
  int k = 0;
  for (auto& p : g.points()) p.z() = (k++ % 2 ? 0.1 : -0.1);
  const auto& pts = g.points();
  Point3 c = Point3::Zero();
  for (const auto& p : pts) c += p;
  c /= double(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) cov += (p - c) * (p - c).transpose();
  const double oracle = std::sqrt(smallest_eigenvalue(cov) / double(pts.size()));
  CHECK(oracle > 0.09);
  CHECK_THAT(fit_plane(g).rms_residual, WithinAbs(oracle, 1e-9));
}

TEST_CASE("collinear grid is an underdetermined plane fit") {
  auto g = synthetic::sample(3, 3, [](double u, double v) { return Point3(u + v, 0, 0); });
  CHECK_THROWS_AS(fit_plane(g), FitError);
}

TEST_CASE("cylinder fit on an exact 120 degree arc") {
  synthetic::Frame fr{{1, 2, 3}, synthetic::X, synthetic::Y, synthetic::Z};
  auto g = synthetic::cylinder(fr, 5.0, synthetic::deg(-60), synthetic::deg(60), 0, 10, false, 9, 9);
  auto f = fit_cylinder(g);
  CHECK_THAT(f.radius, WithinAbs(5.0, 1e-6));
  CHECK(f.rms_residual < 1e-6);
  CHECK_THAT(std::abs(f.axis.z()), WithinAbs(1.0, 1e-9));
}

TEST_CASE("planar grid is not a cylinder") {
  auto g = synthetic::sample(7, 7, [](double u, double v) { return Point3(20 * u, 10 * v, 0); });
  bool rejected = false;
  try {
    rejected = fit_cylinder(g).rms_residual > Tolerances{}.cylinder;
  } catch (const FitError&) {
    rejected = true;
  }
  CHECK(rejected);
  CHECK(classify_face(face_of(g)).type == GeometryType::Plan);
}

TEST_CASE("noisy cylinder radius agrees with an independent circle fit") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 0.01);
  synthetic::Frame fr{{0, 0, 0}, synthetic::X, synthetic::Y, synthetic::Z};
  auto g = synthetic::cylinder(fr, 5.0, synthetic::deg(-60), synthetic::deg(60), 0, 10, false, 11, 15);
  for (auto& p : g.points()) {
    Vec3 radial(p.x(), p.y(), 0);
    p += radial.normalized() * noise(rng);
  }
  auto f = fit_cylinder(g);
  auto [centre, r] = circle_fit(g.points());
  CHECK_THAT(f.radius, WithinAbs(5.0, 0.05));
  CHECK_THAT(r, WithinAbs(5.0, 0.05));
  CHECK_THAT(f.radius, WithinAbs(r, 0.01));
}

TEST_CASE("cone fit recovers the half angle") {
  synthetic::Frame fr{{0, 0, 0}, synthetic::X, synthetic::Y, synthetic::Z};
  auto g = synthetic::cone(fr, synthetic::deg(30), synthetic::deg(-45), synthetic::deg(45), 5, 15);
  auto f = fit_cone(g);
  CHECK(f.rms_residual < 1e-6);
  CHECK_THAT(f.half_angle, WithinAbs(synthetic::deg(30), 1e-6));
}

// ---------------------------------------------------------------- classification

TEST_CASE("one exact instance of every type is classified correctly") {
  const auto p = synthetic::one_of_each();
  const GeometryType expected[] = {GeometryType::Plan,  GeometryType::Cylinder,         GeometryType::ConeShaped,
                                   GeometryType::Ruled, GeometryType::ConstRadiusSweep, GeometryType::Unspecified};
  REQUIRE(p.faces.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    INFO(p.faces[i].id);
    CHECK(classify_face(p.faces[i]).type == expected[i]);
  }
}

TEST_CASE("ruled patch fails the plane, cylinder and cone fits") {
  const auto part = synthetic::one_of_each();
  const auto& f = part.faces[3];
  const Tolerances tol;
  auto rejected = [](auto&& fit, double t) {
    try {
      return fit().rms_residual > t;
    } catch (const FitError&) {
      return true;
    }
  };
  CHECK(fit_plane(f.grid).rms_residual > tol.plane);
  CHECK(rejected([&] { return fit_cylinder(f.grid); }, tol.cylinder));
  CHECK(rejected([&] { return fit_cone(f.grid); }, tol.cone));
  CHECK(ruled_deviation(f.grid).deviation <= tol.ruled);
}

TEST_CASE("torus patch collapses at its tube radius") {
  const auto part = synthetic::one_of_each();
  const auto& f = part.faces[4];
  auto sw = sweep_collapse(f.grid);
  CHECK(sw.spread <= Tolerances{}.sweep);
  CHECK_THAT(sw.radius, WithinRel(3.0, 0.01));
}

TEST_CASE("freeform bump fails every test") {
  const auto part = synthetic::one_of_each();
  const auto& f = part.faces[5];
  const Tolerances tol;
  CHECK(fit_plane(f.grid).rms_residual > tol.plane);
  CHECK(ruled_deviation(f.grid).deviation > tol.ruled);
  CHECK(sweep_collapse(f.grid).spread > tol.sweep);
  CHECK(classify_face(f).type == GeometryType::Unspecified);
}

TEST_CASE("classification survives 20 rigid motions per fixture") {
  std::mt19937_64 rng(99);
  const std::vector<Part> fixtures = {synthetic::one_of_each(), synthetic::carter(), synthetic::stepped_block(),
                                      synthetic::web_with_plate(), synthetic::cone_flank()};
  for (const auto& part : fixtures) {
    std::vector<Classification> base;
    for (const auto& f : part.faces) base.push_back(classify_face(f));
    for (int m = 0; m < 20; ++m) {
      const Part moved = synthetic::moved(part, random_rotation(rng), random_translation(rng));
      for (std::size_t i = 0; i < part.faces.size(); ++i) {
        INFO(part.id << " " << part.faces[i].id << " motion " << m);
        auto c = classify_face(moved.faces[i]);
        CHECK(c.type == base[i].type);
        CHECK_THAT(c.fit_residual, WithinAbs(base[i].fit_residual, 1e-6));
      }
    }
  }
}

TEST_CASE("planar grids are never ruled") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    Eigen::Matrix3d R = random_rotation(rng);
    Vec3 t = random_translation(rng);
    Grid g = synthetic::sample(3 + i % 5, 3 + i % 7, [&](double u, double v) {
      return Point3(R * Point3(40 * u + 3 * v * v, 15 * v + 3 * u * u, 0) + t);
    });
    REQUIRE(ruled_deviation(g).deviation > Tolerances{}.ruled);
    CHECK(classify_face(face_of(g)).type == GeometryType::Plan);
    Grid straight = synthetic::sample(4, 4, [&](double u, double v) { return Point3(R * Point3(9 * u, 7 * v, 0) + t); });
    REQUIRE(ruled_deviation(straight).deviation <= Tolerances{}.ruled);
    CHECK(classify_face(face_of(straight)).type == GeometryType::Plan);
  }
}

TEST_CASE("plane tolerance decides precedence") {
  auto g = synthetic::sample(7, 7, [](double u, double v) { return Point3(10 * u, 10 * v, 0.0004 * std::sin(7 * u)); });
  CHECK(classify_face(face_of(g)).type == GeometryType::Plan);
  Tolerances tight;
  tight.plane = 1e-5;
  CHECK(classify_face(face_of(g), tight).type != GeometryType::Plan);
}

TEST_CASE("classification is total") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 30; ++i) {
    Grid g(4, 4);
    for (auto& p : g.points()) p = Point3(u(rng), u(rng), u(rng));
    auto c = classify_face(face_of(g));
    CHECK(std::find(kGeometryTypes.begin(), kGeometryTypes.end(), c.type) != kGeometryTypes.end());
  }
}

// ---------------------------------------------------------------- openness

TEST_CASE("edge openness follows the material angle") {
  auto g = synthetic::sample(3, 3, [](double u, double v) { return Point3(u, v, 0); });
  SampledFace f{"A", g, {{"B", 90}, {"C", 270}, {"D", 180}}, {}};
  auto o = compute_openness(f);
  REQUIRE(o.edges.size() == 3);
  CHECK(o.edges[0].openness == Openness::Open);
  CHECK(o.edges[1].openness == Openness::Closed);
  CHECK(o.edges[2].openness == Openness::Closed);
  CHECK(o.aggregate == Openness::Closed);
  CHECK(compute_openness(SampledFace{"A", g, {{"B", 90}, {"C", 179.9}}, {}}).aggregate == Openness::Open);
  CHECK(compute_openness(SampledFace{"A", g, {}, {}}).aggregate == Openness::Open);
}

TEST_CASE("openness ignores geometry") {
  auto a = synthetic::sample(3, 3, [](double u, double v) { return Point3(u, v, 0); });
  auto b = synthetic::sample(5, 4, [](double u, double v) { return Point3(u * u, v, u * v); });
  std::vector<Adjacency> adj{{"B", 45}, {"C", 200}};
  auto oa = compute_openness({"A", a, adj, {}});
  auto ob = compute_openness({"A", b, adj, {}});
  CHECK(oa.edges == ob.edges);
  CHECK(oa.aggregate == ob.aggregate);
}

// ---------------------------------------------------------------- access

TEST_CASE("top face of an isolated block has one compulsory direction") {
  const auto p = synthetic::block(40, 30, 20);
  auto r = compute_access_directions(*p.find("top"), p);
  REQUIRE(r.directions.size() == 1);
  CHECK(r.directions[0].direction.isApprox(Vec3(0, 0, 1), 1e-12));
  CHECK(r.directions[0].kind == AccessKind::SingleVector);
  CHECK(r.directions[0].compulsory);
}

TEST_CASE("free-standing web is reachable from two opposite directions") {
  const auto p = synthetic::web_with_plate();
  auto r = compute_access_directions(*p.find("web"), p);
  REQUIRE(r.directions.size() == 2);
  CHECK(r.directions[0].kind == AccessKind::TwoOppositeVectors);
  CHECK(r.directions[0].direction.dot(r.directions[1].direction) < -1.0 + 1e-9);
  for (const auto& d : r.directions) CHECK(!d.compulsory);
}

TEST_CASE("external cone flank has a continuum of directions") {
  const auto p = synthetic::cone_flank();
  auto r = compute_access_directions(p.faces[0], p);
  REQUIRE(r.directions.size() > 2);
  CHECK(r.continuum);
  for (const auto& d : r.directions) {
    CHECK(d.kind == AccessKind::NVectors);
    CHECK_THAT(d.direction.norm(), WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("enclosed face is inaccessible") {
  const auto p = synthetic::block_with_hidden_face();
  auto tr = transform_part(p);
  CHECK(tr.inaccessible == std::vector<std::string>{"hidden"});
  CHECK(tr.find("hidden")->potential_mfg_types.empty());
}

TEST_CASE("access directions are unit vectors on every fixture") {
  for (const auto& fx : synthetic::shipped_fixtures()) {
    auto tr = transform_part(fx.part);
    for (const auto& a : tr.faces)
      for (const auto& d : a.access) CHECK_THAT(d.direction.norm(), WithinAbs(1.0, 1e-9));
  }
}

// ---------------------------------------------------------------- dimensions

TEST_CASE("flush face: end 20, flank 50, global 0") {
  const auto p = synthetic::floor_below_rim(0);
  auto d = compute_access_dimensions(*p.find("floor"), bounding_box(p), Vec3::UnitZ());
  CHECK_THAT(d.end_accessibility, WithinAbs(20, 1e-9));
  CHECK_THAT(d.flank_accessibility, WithinAbs(50, 1e-9));
  CHECK_THAT(d.global_accessibility, WithinAbs(0, 1e-9));
}

TEST_CASE("floor 30 below the top has global accessibility 30") {
  const auto p = synthetic::floor_below_rim(30);
  const auto box = bounding_box(p);
  const double oracle = box.max.z() - bounding_box(*p.find("floor")).max.z();
  auto tr = transform_part(p);
  const auto* a = tr.find("floor");
  CHECK_THAT(oracle, WithinAbs(30, 1e-12));
  CHECK_THAT(a->global_accessibility, WithinAbs(oracle, 1e-9));
  CHECK_THAT(a->end_accessibility, WithinAbs(20, 1e-9));
  CHECK_THAT(a->flank_accessibility, WithinAbs(50, 1e-9));
}

TEST_CASE("minimal rectangle of a rotated face") {
  const Eigen::Matrix3d R = Eigen::AngleAxisd(0.6, Vec3::UnitZ()).toRotationMatrix();
  auto g = synthetic::sample(3, 5, [&](double u, double v) { return Point3(R * Point3(12 * u, 33 * v, 0)); });
  Part p{"p", "mm", {face_of(g)}};
  auto d = compute_access_dimensions(p.faces[0], bounding_box(p), Vec3::UnitZ());
  CHECK_THAT(d.end_accessibility, WithinAbs(12, 1e-9));
  CHECK_THAT(d.flank_accessibility, WithinAbs(33, 1e-9));
}

TEST_CASE("concave fillet radius is recovered") {
  for (double r : {2.0, 3.0, 5.0}) {
    auto p = synthetic::fillet_face(r);
    CHECK_THAT(min_concave_radius(p.faces[0].grid), WithinRel(r, 0.05));
  }
  auto flat = synthetic::sample(5, 5, [](double u, double v) { return Point3(u, v, 0); });
  CHECK(std::isinf(min_concave_radius(flat)));
}

TEST_CASE("end accessibility never exceeds flank accessibility") {
  for (const auto& part : {synthetic::carter(), synthetic::pocket_plate(2, 2, 1), synthetic::one_of_each()}) {
    auto tr = transform_part(part);
    for (const auto& a : tr.faces) {
      INFO(a.id);
      CHECK(a.end_accessibility <= a.flank_accessibility);
      CHECK(a.global_accessibility >= 0);
      CHECK(a.min_fillet_radius > 0);
      for (const auto& d : a.per_direction) CHECK(d.end_accessibility <= d.flank_accessibility);
    }
  }
}

// ---------------------------------------------------------------- manufacturing types

TEST_CASE("planar face with access along its normal is end machined") {
  auto tr = transform_part(synthetic::block(40, 30, 20));
  CHECK(mfg_set(*tr.find("top")) == std::set<MfgType>{MfgType::EndManufacturing});
}

TEST_CASE("web reached along its rulings is flank machined") {
  auto tr = transform_part(synthetic::web_with_plate());
  const auto* w = tr.find("web");
  CHECK(w->geometry_type == GeometryType::Ruled);
  CHECK(has_direction(*w, Vec3::UnitZ()));
  CHECK(mfg_set(*w) == std::set<MfgType>{MfgType::FlankManufacturing});
}

TEST_CASE("closed bore along its axis is drilled and flank machined") {
  auto tr = transform_part(synthetic::carter());
  const auto* bore = tr.find("F20");
  CHECK(bore->geometry_type == GeometryType::Cylinder);
  CHECK(bore->openness == Openness::Closed);
  CHECK(mfg_set(*bore) == std::set<MfgType>{MfgType::FlankManufacturing, MfgType::Drilling});
}

TEST_CASE("accessible faces always have a manufacturing type") {
  for (const auto& fx : synthetic::shipped_fixtures()) {
    auto tr = transform_part(fx.part);
    for (const auto& a : tr.faces) CHECK(a.inaccessible() == a.potential_mfg_types.empty());
  }
}

// ---------------------------------------------------------------- transform_part

TEST_CASE("carter fixture yields 24 records") {
  auto tr = transform_part(synthetic::carter());
  CHECK(tr.faces.size() == 24);
  int sum = 0;
  for (const auto& [t, n] : tr.counts) sum += n;
  CHECK(sum == 24);
  CHECK(tr.counts.at(GeometryType::Plan) == 12);
  CHECK(tr.counts.at(GeometryType::Cylinder) == 7);
  CHECK(tr.counts.at(GeometryType::ConeShaped) == 2);
  CHECK(tr.counts.at(GeometryType::Ruled) == 1);
  CHECK(tr.counts.at(GeometryType::ConstRadiusSweep) == 1);
  CHECK(tr.counts.at(GeometryType::Unspecified) == 1);
}

TEST_CASE("block counts and one-of-each counts") {
  auto block = transform_part(synthetic::block(10, 20, 30));
  CHECK(block.counts.at(GeometryType::Plan) == 6);
  auto each = transform_part(synthetic::one_of_each());
  for (auto t : kGeometryTypes) CHECK(each.counts.at(t) == 1);
}

TEST_CASE("transform is deterministic and independent of face order") {
  const auto p = synthetic::carter();
  auto a = transform_part(p);
  auto b = transform_part(p);
  CHECK(a.faces == b.faces);
  Part rev = p;
  std::reverse(rev.faces.begin(), rev.faces.end());
  auto c = transform_part(rev);
  for (const auto& f : a.faces) CHECK(*c.find(f.id) == f);
}
