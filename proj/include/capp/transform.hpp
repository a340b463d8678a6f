#pragma once

// Transformation phase: per-face geometry type and manufacturability attributes.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capp/fitting.hpp"
#include "capp/part_model.hpp"

namespace capp {

enum class GeometryType { Plan, Cylinder, ConeShaped, Ruled, ConstRadiusSweep, Unspecified };
enum class MfgType { EndManufacturing, FlankManufacturing, Sweeping, Drilling };
enum class AccessKind { SingleVector, TwoOppositeVectors, NVectors };
enum class Openness { Open, Closed };

inline constexpr std::array kGeometryTypes = {GeometryType::Plan,  GeometryType::Cylinder,
                                              GeometryType::ConeShaped, GeometryType::Ruled,
                                              GeometryType::ConstRadiusSweep, GeometryType::Unspecified};
inline constexpr std::array kMfgTypes = {MfgType::EndManufacturing, MfgType::FlankManufacturing, MfgType::Sweeping,
                                         MfgType::Drilling};

inline std::string_view to_string(GeometryType t) {
  switch (t) {
    case GeometryType::Plan: return "Plan";
    case GeometryType::Cylinder: return "Cylinder";
    case GeometryType::ConeShaped: return "ConeShaped";
    case GeometryType::Ruled: return "Ruled";
    case GeometryType::ConstRadiusSweep: return "ConstRadiusSweep";
    case GeometryType::Unspecified: return "Unspecified";
  }
  return "";
}

inline std::string_view to_string(MfgType t) {
  switch (t) {
    case MfgType::EndManufacturing: return "EndManufacturing";
    case MfgType::FlankManufacturing: return "FlankManufacturing";
    case MfgType::Sweeping: return "Sweeping";
    case MfgType::Drilling: return "Drilling";
  }
  return "";
}

inline std::string_view to_string(AccessKind k) {
  switch (k) {
    case AccessKind::SingleVector: return "SingleVector";
    case AccessKind::TwoOppositeVectors: return "TwoOppositeVectors";
    case AccessKind::NVectors: return "NVectors";
  }
  return "";
}

inline std::string_view to_string(Openness o) { return o == Openness::Open ? "Open" : "Closed"; }

template <class Enum, std::size_t N>
std::optional<Enum> enum_from_string(std::string_view s, const std::array<Enum, N>& values) {
  for (auto v : values)
    if (to_string(v) == s) return v;
  return std::nullopt;
}

inline std::optional<GeometryType> geometry_type_from_string(std::string_view s) {
  return enum_from_string(s, kGeometryTypes);
}
inline std::optional<MfgType> mfg_type_from_string(std::string_view s) { return enum_from_string(s, kMfgTypes); }
inline std::optional<AccessKind> access_kind_from_string(std::string_view s) {
  return enum_from_string(
      s, std::array{AccessKind::SingleVector, AccessKind::TwoOppositeVectors, AccessKind::NVectors});
}
inline std::optional<Openness> openness_from_string(std::string_view s) {
  return enum_from_string(s, std::array{Openness::Open, Openness::Closed});
}

struct Tolerances {
  double plane = 1e-3;        // mm rms
  double cylinder = 1e-3;     // mm rms
  double cone = 1e-3;         // mm rms
  double ruled = 1e-3;        // mm max deviation
  double sweep = 1e-2;        // mm collapse spread
  double normal_cone = 1e-3;  // slack on n.d >= -eps
  double direction = 1e-3;    // 1 - |cos| below which two directions count as aligned
  double clearance = 1e-3;    // mm, ray start offset and sample nudge
  double sweep_min_radius = 0.1;
  double sweep_max_radius = 500.0;
  double fan_step_deg = 5.0;
  int iteration_budget = 100;
};

struct Classification {
  GeometryType type = GeometryType::Unspecified;
  double fit_residual = 0.0;
  std::optional<Vec3> axis;    // cylinder and cone
  std::optional<Vec3> ruling;  // ruled surfaces and cylinders
  std::optional<double> radius;
};

/// Exclusive classification. Tests run Plan, Cylinder, ConeShaped, Ruled,
/// ConstRadiusSweep in that order and the first one within tolerance wins.
inline Classification classify_face(const SampledFace& face, const Tolerances& tol = {}) {
  const Grid& g = face.grid;
  FitOptions fopt{tol.iteration_budget};
  Classification out;
  double fallback_residual = std::numeric_limits<double>::infinity();

  try {
    auto pf = fit_plane(g);
    if (pf.rms_residual <= tol.plane) return {GeometryType::Plan, pf.rms_residual, {}, {}, {}};
    fallback_residual = pf.rms_residual;
  } catch (const FitError&) {
  }
  try {
    auto cf = fit_cylinder(g, fopt);
    if (cf.rms_residual <= tol.cylinder)
      return {GeometryType::Cylinder, cf.rms_residual, cf.axis, cf.axis, cf.radius};
  } catch (const FitError&) {
  }
  try {
    auto kf = fit_cone(g, fopt);
    if (kf.rms_residual <= tol.cone) return {GeometryType::ConeShaped, kf.rms_residual, kf.axis, {}, {}};
  } catch (const FitError&) {
  }
  auto rf = ruled_deviation(g);
  if (rf.deviation <= tol.ruled) return {GeometryType::Ruled, rf.deviation, {}, rf.ruling, {}};
  auto sf = sweep_collapse(g, {tol.sweep_min_radius, tol.sweep_max_radius});
  if (sf.spread <= tol.sweep) return {GeometryType::ConstRadiusSweep, sf.spread, {}, {}, sf.radius};

  out.fit_residual = std::isfinite(fallback_residual) ? fallback_residual : 0.0;
  return out;
}

struct EdgeOpenness {
  std::string face;
  Openness openness = Openness::Open;

  friend bool operator==(const EdgeOpenness&, const EdgeOpenness&) = default;
};

struct OpennessResult {
  Openness aggregate = Openness::Open;
  std::vector<EdgeOpenness> edges;
};

/// An edge is open when it borders less than 180 degrees of material; 180
/// itself counts as closed. A face is open when all of its edges are.
inline OpennessResult compute_openness(const SampledFace& face) {
  OpennessResult out;
  for (const auto& a : face.adjacency) {
    Openness o = a.material_angle_deg < 180.0 ? Openness::Open : Openness::Closed;
    out.edges.push_back({a.face, o});
    if (o == Openness::Closed) out.aggregate = Openness::Closed;
  }
  return out;
}

struct AccessDirection {
  Vec3 direction = Vec3::UnitZ();
  AccessKind kind = AccessKind::SingleVector;
  bool compulsory = false;

  friend bool operator==(const AccessDirection&, const AccessDirection&) = default;
};

/// Coarse ray occlusion against the sampled faces of a part: a face
/// bounding-box prefilter, then the two triangles of every grid cell.
class OcclusionScene {
public:
  struct Triangle {
    Point3 a, b, c;
  };
  struct FaceCells {
    std::string id;
    Box3 box;
    std::vector<Triangle> triangles;
  };

  explicit OcclusionScene(const Part& part) {
    for (const auto& f : part.faces) {
      FaceCells fc{f.id, bounding_box(f), {}};
      const auto& g = f.grid;
      for (std::size_t r = 0; r + 1 < g.rows(); ++r)
        for (std::size_t c = 0; c + 1 < g.cols(); ++c) {
          fc.triangles.push_back({g(r, c), g(r + 1, c), g(r + 1, c + 1)});
          fc.triangles.push_back({g(r, c), g(r + 1, c + 1), g(r, c + 1)});
        }
      faces_.push_back(std::move(fc));
    }
  }

  /// True when the ray origin + t*dir, t > tmin, meets a face not listed in
  /// `ignore`.
  [[nodiscard]] bool blocked(const Point3& origin, const Vec3& dir, double tmin,
                             const std::set<std::string>& ignore) const {
    for (const auto& f : faces_) {
      if (ignore.count(f.id) || !hits(f.box, origin, dir, tmin)) continue;
      for (const auto& t : f.triangles)
        if (hits(t, origin, dir, tmin)) return true;
    }
    return false;
  }

  static bool hits(const Box3& b, const Point3& o, const Vec3& d, double tmin) {
    double t0 = tmin, t1 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      if (std::abs(d(i)) < 1e-15) {
        if (o(i) < b.min(i) || o(i) > b.max(i)) return false;
        continue;
      }
      double ta = (b.min(i) - o(i)) / d(i), tb = (b.max(i) - o(i)) / d(i);
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) return false;
    }
    return true;
  }

  static bool hits(const Triangle& tri, const Point3& o, const Vec3& d, double tmin) {
    Vec3 e1 = tri.b - tri.a, e2 = tri.c - tri.a;
    Vec3 p = d.cross(e2);
    double det = e1.dot(p);
    if (std::abs(det) < 1e-14) return false;
    double inv = 1.0 / det;
    Vec3 s = o - tri.a;
    double u = s.dot(p) * inv;
    if (u < 0.0 || u > 1.0) return false;
    Vec3 q = s.cross(e1);
    double v = d.dot(q) * inv;
    if (v < 0.0 || u + v > 1.0) return false;
    return e2.dot(q) * inv > tmin;
  }

private:
  std::vector<FaceCells> faces_;
};

namespace detail {

inline bool same_direction(const Vec3& a, const Vec3& b, double tol = 5e-13) { return a.dot(b) > 1.0 - tol; }

inline Vec3 rotate_about(const Vec3& v, const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()) * v;
}

inline bool lex_greater(const Vec3& a, const Vec3& b) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(a(i) - b(i)) > 1e-12) return a(i) > b(i);
  }
  return false;
}

// Ray origins: interior samples (or all samples on border-only grids) nudged
// off the surface along their normals.
inline std::vector<Point3> ray_origins(const Grid& g, const std::vector<Vec3>& normals, double clearance) {
  std::vector<Point3> out;
  bool interior = g.rows() > 2 && g.cols() > 2;
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) {
      if (interior && (r == 0 || c == 0 || r + 1 == g.rows() || c + 1 == g.cols())) continue;
      out.push_back(g(r, c) + clearance * normals[r * g.cols() + c]);
    }
  return out;
}

}  // namespace detail

/// Sum of sample normals, counting a duplicated closing row or column of a
/// closed grid only once.
inline Vec3 seam_aware_mean_normal(const Grid& g, const std::vector<Vec3>& normals) {
  auto same = [](const Point3& a, const Point3& b) { return (a - b).norm() < 1e-9; };
  bool closed_cols = g.cols() > 2, closed_rows = g.rows() > 2;
  for (std::size_t r = 0; r < g.rows() && closed_cols; ++r) closed_cols = same(g(r, 0), g(r, g.cols() - 1));
  for (std::size_t c = 0; c < g.cols() && closed_rows; ++c) closed_rows = same(g(0, c), g(g.rows() - 1, c));
  Vec3 sum = Vec3::Zero();
  for (std::size_t r = 0; r < g.rows(); ++r) {
    if (closed_rows && r + 1 == g.rows()) continue;
    for (std::size_t c = 0; c < g.cols(); ++c) {
      if (closed_cols && c + 1 == g.cols()) continue;
      sum += normals[r * g.cols() + c];
    }
  }
  return sum;
}

struct AccessResult {
  std::vector<AccessDirection> directions;
  bool continuum = false;
  [[nodiscard]] bool inaccessible() const { return directions.empty(); }
};

/// Admissible access directions of a classified face.
///
/// Candidates are the mean normal, its negation, the ruling and the axis of
/// ruled, cylindrical and conical faces, and for cylinders and cones a fan of
/// mean-normal rotations about the axis. Candidates within the direction
/// tolerance of a part-frame axis are snapped onto it. A candidate is kept when no sample
/// normal points against it and no ray from the face along it meets another
/// non-adjacent face.
inline AccessResult compute_access_directions(const SampledFace& face, const Classification& cls,
                                              const OcclusionScene& scene, const Tolerances& tol = {}) {
  const auto normals = sample_normals(face.grid);
  Vec3 sum = seam_aware_mean_normal(face.grid, normals);
  std::optional<Vec3> m;
  if (sum.norm() > 1e-9 * double(normals.size())) m = sum.normalized();

  std::vector<Vec3> candidates;
  auto add = [&](const Vec3& d) {
    Vec3 u = d.normalized();
    for (int k = 0; k < 3; ++k)
      if (std::abs(u(k)) >= 1.0 - tol.direction) u = std::copysign(1.0, u(k)) * Vec3::Unit(k);
    for (const auto& c : candidates)
      if (detail::same_direction(c, u, tol.direction)) return;
    candidates.push_back(u);
  };
  bool has_axis = cls.axis && (cls.type == GeometryType::Cylinder || cls.type == GeometryType::ConeShaped);
  if (has_axis) {
    add(*cls.axis);
    add(-*cls.axis);
  }
  if (cls.ruling && (cls.type == GeometryType::Ruled || cls.type == GeometryType::Cylinder)) {
    add(*cls.ruling);
    add(-*cls.ruling);
  }
  if (m) {
    add(*m);
    add(-*m);
  }

  std::set<std::string> ignore{face.id};
  for (const auto& a : face.adjacency) ignore.insert(a.face);
  const auto origins = detail::ray_origins(face.grid, normals, tol.clearance);

  auto admissible = [&](const Vec3& d) {
    for (const auto& n : normals)
      if (!n.isZero() && n.dot(d) < -tol.normal_cone) return false;
    for (const auto& o : origins)
      if (scene.blocked(o, d, tol.clearance, ignore)) return false;
    return true;
  };

  AccessResult out;
  std::vector<Vec3> accepted;
  for (const auto& d : candidates)
    if (admissible(d)) accepted.push_back(d);

  if (has_axis && m && std::abs(m->dot(*cls.axis)) < 1.0 - tol.direction) {
    // Fan of directions obtained by turning the mean normal about the axis.
    const int steps = static_cast<int>(std::floor(90.0 / tol.fan_step_deg + 1e-9));
    int run = 0, best_run = 0;
    for (int i = -steps; i <= steps; ++i) {
      Vec3 d = detail::rotate_about(*m, *cls.axis, i * tol.fan_step_deg * M_PI / 180.0).normalized();
      bool ok = i == 0 ? std::any_of(accepted.begin(), accepted.end(),
                                     [&](const Vec3& a) { return detail::same_direction(a, d, tol.direction); })
                       : admissible(d);
      run = ok ? run + 1 : 0;
      best_run = std::max(best_run, run);
      if (ok && i != 0 &&
          std::none_of(accepted.begin(), accepted.end(),
                       [&](const Vec3& a) { return detail::same_direction(a, d, tol.direction); }))
        accepted.push_back(d);
    }
    out.continuum = best_run >= 3;
  }

  AccessKind kind = AccessKind::NVectors;
  if (!out.continuum) {
    if (accepted.size() == 1) {
      kind = AccessKind::SingleVector;
    } else if (accepted.size() == 2 && accepted[0].dot(accepted[1]) < -1.0 + 1e-9) {
      kind = AccessKind::TwoOppositeVectors;
    }
  }
  const bool compulsory = accepted.size() == 1;
  for (const auto& d : accepted) out.directions.push_back({d, kind, compulsory});
  return out;
}

inline AccessResult compute_access_directions(const SampledFace& face, const Part& part, const Tolerances& tol = {}) {
  return compute_access_directions(face, classify_face(face, tol), OcclusionScene(part), tol);
}

struct DirectionalDims {
  Vec3 direction = Vec3::UnitZ();
  double end_accessibility = 0.0;
  double flank_accessibility = 0.0;
  double global_accessibility = 0.0;
  double depth = 0.0;  // extent of the face along the direction

  friend bool operator==(const DirectionalDims&, const DirectionalDims&) = default;
};

namespace detail {

inline double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
}

inline std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> p) {
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  std::vector<Eigen::Vector2d> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], p[i]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross2(h[k - 2], h[k - 1], p[i - 1]) <= 0) --k;
    h[k++] = p[i - 1];
  }
  h.resize(k - 1);
  return h;
}

}  // namespace detail

/// Sides (short, long) of the minimum-area rectangle enclosing the points.
inline std::pair<double, double> min_area_rectangle(const std::vector<Eigen::Vector2d>& pts) {
  auto hull = detail::convex_hull(pts);
  if (hull.empty()) return {0.0, 0.0};
  if (hull.size() < 3) {
    double len = hull.size() == 2 ? (hull[1] - hull[0]).norm() : 0.0;
    return {0.0, len};
  }
  double best_area = std::numeric_limits<double>::infinity();
  std::pair<double, double> best{0.0, 0.0};
  for (std::size_t i = 0; i < hull.size(); ++i) {
    Eigen::Vector2d e = hull[(i + 1) % hull.size()] - hull[i];
    double len = e.norm();
    if (len < 1e-15) continue;
    e /= len;
    Eigen::Vector2d n(-e.y(), e.x());
    double a0 = std::numeric_limits<double>::infinity(), a1 = -a0, b0 = a0, b1 = -a0;
    for (const auto& p : hull) {
      a0 = std::min(a0, p.dot(e));
      a1 = std::max(a1, p.dot(e));
      b0 = std::min(b0, p.dot(n));
      b1 = std::max(b1, p.dot(n));
    }
    double w = a1 - a0, h = b1 - b0;
    if (w * h < best_area - 1e-12) {
      best_area = w * h;
      best = {std::min(w, h), std::max(w, h)};
    }
  }
  return best;
}

inline DirectionalDims compute_access_dimensions(const SampledFace& face, const Box3& part_box, const Vec3& dir) {
  Vec3 d = dir.normalized();
  auto [e1, e2] = detail::orthonormal_basis(d);
  std::vector<Eigen::Vector2d> proj;
  double top = -std::numeric_limits<double>::infinity(), bottom = std::numeric_limits<double>::infinity();
  for (const auto& p : face.grid.points()) {
    proj.emplace_back(p.dot(e1), p.dot(e2));
    top = std::max(top, p.dot(d));
    bottom = std::min(bottom, p.dot(d));
  }
  auto [end, flank] = min_area_rectangle(proj);
  double entry = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 8; ++i) {
    Point3 corner((i & 1) ? part_box.max.x() : part_box.min.x(), (i & 2) ? part_box.max.y() : part_box.min.y(),
                  (i & 4) ? part_box.max.z() : part_box.min.z());
    entry = std::max(entry, corner.dot(d));
  }
  DirectionalDims out;
  out.direction = d;
  out.end_accessibility = end;
  out.flank_accessibility = flank;
  out.global_accessibility = std::max(0.0, entry - top);
  out.depth = top - bottom;
  return out;
}

struct FaceAttributes {
  std::string id;
  GeometryType geometry_type = GeometryType::Unspecified;
  double fit_residual = 0.0;
  Openness openness = Openness::Open;
  std::vector<EdgeOpenness> edge_openness;
  std::vector<AccessDirection> access;
  double end_accessibility = 0.0;
  double flank_accessibility = 0.0;
  double global_accessibility = 0.0;
  double depth = 0.0;
  double min_fillet_radius = std::numeric_limits<double>::infinity();  // +inf = Unbounded
  Box3 dimension_box;
  std::vector<MfgType> potential_mfg_types;  // sorted, unique
  std::vector<DirectionalDims> per_direction;
  std::optional<Vec3> axis;
  std::optional<Vec3> ruling;

  [[nodiscard]] bool inaccessible() const { return access.empty(); }
  [[nodiscard]] AccessKind access_kind() const {
    return access.empty() ? AccessKind::NVectors : access.front().kind;
  }
  [[nodiscard]] bool access_compulsory() const { return access.size() == 1; }

  [[nodiscard]] const DirectionalDims* dims_for(const Vec3& d, double angle_tol = 1e-6) const {
    for (const auto& pd : per_direction)
      if (pd.direction.dot(d) >= std::cos(angle_tol)) return &pd;
    return nullptr;
  }

  friend bool operator==(const FaceAttributes&, const FaceAttributes&) = default;
};

/// Manufacturing types implied by the accessibility results:
///  R1 an access direction aligned with a sample normal -> EndManufacturing
///  R2 ruled/cylinder/cone with ruling or axis aligned with access -> FlankManufacturing
///  R3 unspecified or constant-radius sweep -> Sweeping
///  R4 closed cylinder with axis aligned with access -> Drilling
/// An accessible face for which no rule fires is given Sweeping.
inline std::vector<MfgType> deduce_mfg_types(const FaceAttributes& attrs, std::span<const Vec3> normals,
                                             const Tolerances& tol = {}) {
  std::set<MfgType> out;
  if (attrs.access.empty()) return {};
  auto aligned = [&](const Vec3& a, const Vec3& b) { return std::abs(a.dot(b)) >= 1.0 - tol.direction; };
  for (const auto& ad : attrs.access)
    for (const auto& n : normals)
      if (!n.isZero() && n.dot(ad.direction) >= 1.0 - tol.direction) out.insert(MfgType::EndManufacturing);

  const auto t = attrs.geometry_type;
  std::optional<Vec3> line = t == GeometryType::Ruled ? attrs.ruling : attrs.axis;
  if ((t == GeometryType::Ruled || t == GeometryType::Cylinder || t == GeometryType::ConeShaped) && line) {
    for (const auto& ad : attrs.access)
      if (aligned(ad.direction, *line)) out.insert(MfgType::FlankManufacturing);
  }
  if (t == GeometryType::Unspecified || t == GeometryType::ConstRadiusSweep) out.insert(MfgType::Sweeping);
  if (t == GeometryType::Cylinder && attrs.openness == Openness::Closed && attrs.axis) {
    for (const auto& ad : attrs.access)
      if (aligned(ad.direction, *attrs.axis)) out.insert(MfgType::Drilling);
  }
  if (out.empty()) out.insert(MfgType::Sweeping);
  return {out.begin(), out.end()};
}

struct TransformResult {
  std::vector<FaceAttributes> faces;  // part order
  std::map<GeometryType, int> counts;
  std::vector<std::string> inaccessible;

  [[nodiscard]] const FaceAttributes* find(const std::string& id) const {
    for (const auto& f : faces)
      if (f.id == id) return &f;
    return nullptr;
  }
};

inline FaceAttributes analyse_face(const SampledFace& face, const Box3& part_box, const OcclusionScene& scene,
                                   const Tolerances& tol = {}) {
  FaceAttributes a;
  a.id = face.id;
  const auto cls = classify_face(face, tol);
  a.geometry_type = cls.type;
  a.fit_residual = cls.fit_residual;
  a.axis = cls.axis;
  a.ruling = cls.ruling;
  auto op = compute_openness(face);
  a.openness = op.aggregate;
  a.edge_openness = op.edges;
  a.access = compute_access_directions(face, cls, scene, tol).directions;
  a.dimension_box = bounding_box(face);
  a.min_fillet_radius = min_concave_radius(face.grid);

  for (const auto& ad : a.access) a.per_direction.push_back(compute_access_dimensions(face, part_box, ad.direction));
  const DirectionalDims* pick = nullptr;
  for (const auto& pd : a.per_direction) {
    if (!pick || pd.global_accessibility < pick->global_accessibility - 1e-9 ||
        (std::abs(pd.global_accessibility - pick->global_accessibility) <= 1e-9 &&
         detail::lex_greater(pd.direction, pick->direction)))
      pick = &pd;
  }
  DirectionalDims stored;
  if (pick) {
    stored = *pick;
  } else {
    Vec3 m = seam_aware_mean_normal(face.grid, sample_normals(face.grid));
    stored = compute_access_dimensions(face, part_box, m.norm() > 1e-12 ? Vec3(m.normalized()) : Vec3::UnitZ());
  }
  a.end_accessibility = stored.end_accessibility;
  a.flank_accessibility = stored.flank_accessibility;
  a.global_accessibility = stored.global_accessibility;
  a.depth = stored.depth;

  const auto normals = sample_normals(face.grid);
  a.potential_mfg_types = deduce_mfg_types(a, normals, tol);
  return a;
}

inline TransformResult transform_part(const Part& part, const Tolerances& tol = {}) {
  TransformResult out;
  const Box3 part_box = bounding_box(part);
  const OcclusionScene scene(part);
  for (auto t : kGeometryTypes) out.counts[t] = 0;
  for (const auto& f : part.faces) {
    auto a = analyse_face(f, part_box, scene, tol);
    out.counts[a.geometry_type] += 1;
    if (a.inaccessible()) out.inaccessible.push_back(a.id);
    out.faces.push_back(std::move(a));
  }
  return out;
}

}  // namespace capp
