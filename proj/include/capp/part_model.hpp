#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace capp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Coordinates in millimetres.
using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;

/// Axis-aligned box. An empty box has min > max on every axis.
struct Box3 {
  Point3 min = Point3::Constant(std::numeric_limits<double>::infinity());
  Point3 max = Point3::Constant(-std::numeric_limits<double>::infinity());

  [[nodiscard]] bool empty() const { return (min.array() > max.array()).any(); }

  void extend(const Point3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }

  void extend(const Box3& other) {
    if (other.empty()) return;
    extend(other.min);
    extend(other.max);
  }

  [[nodiscard]] bool contains(const Box3& other, double tol = 0.0) const {
    return ((min.array() - tol) <= other.min.array()).all() &&
           ((max.array() + tol) >= other.max.array()).all();
  }

  [[nodiscard]] Vec3 extent() const { return max - min; }
  [[nodiscard]] Point3 center() const { return 0.5 * (min + max); }
  [[nodiscard]] double diagonal() const { return empty() ? 0.0 : extent().norm(); }

  friend bool operator==(const Box3& a, const Box3& b) { return a.min == b.min && a.max == b.max; }
};

/// Row-major rectangular sample grid over one face.
///
/// Samples are indexed (row, col). The outward normal at a sample is the
/// cross product of the column-direction tangent and the row-direction
/// tangent, so the air side of the face is on the left of increasing
/// columns when looking down rows.
class Grid {
public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), pts_(rows * cols, Point3::Zero()) {}

  static Grid from_rows(const std::vector<std::vector<Point3>>& rows) {
    Grid g;
    g.rows_ = rows.size();
    g.cols_ = rows.empty() ? 0 : rows.front().size();
    for (const auto& r : rows) {
      if (r.size() != g.cols_) throw Error("grid rows have different lengths");
      g.pts_.insert(g.pts_.end(), r.begin(), r.end());
    }
    return g;
  }

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] std::size_t size() const { return pts_.size(); }

  Point3& operator()(std::size_t r, std::size_t c) { return pts_[r * cols_ + c]; }
  [[nodiscard]] const Point3& operator()(std::size_t r, std::size_t c) const { return pts_[r * cols_ + c]; }

  [[nodiscard]] const std::vector<Point3>& points() const { return pts_; }
  std::vector<Point3>& points() { return pts_; }

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Point3> pts_;
};

struct Adjacency {
  std::string face;
  double material_angle_deg = 0.0;

  friend bool operator==(const Adjacency&, const Adjacency&) = default;
};

struct SampledFace {
  std::string id;
  Grid grid;
  std::vector<Adjacency> adjacency;
  std::optional<std::string> label;

  friend bool operator==(const SampledFace&, const SampledFace&) = default;
};

struct Part {
  std::string id;
  std::string units = "mm";
  std::vector<SampledFace> faces;

  [[nodiscard]] const SampledFace* find(const std::string& face_id) const {
    for (const auto& f : faces)
      if (f.id == face_id) return &f;
    return nullptr;
  }

  friend bool operator==(const Part&, const Part&) = default;
};

struct Violation {
  std::string face;  // empty for part-level violations
  std::string reason;

  friend bool operator==(const Violation&, const Violation&) = default;
  friend auto operator<=>(const Violation&, const Violation&) = default;
};

/// Every invariant violation of the part, sorted by (face, reason).
/// Sorting makes the report independent of face order.
inline std::vector<Violation> validate_part(const Part& part) {
  std::vector<Violation> out;
  if (part.units != "mm") out.push_back({"", "units must be \"mm\""});
  if (part.faces.empty()) out.push_back({"", "part has no faces"});

  std::map<std::string, const SampledFace*> by_id;
  for (const auto& f : part.faces) {
    if (f.id.empty()) out.push_back({"", "face with empty id"});
    if (!by_id.emplace(f.id, &f).second) out.push_back({f.id, "duplicate face id"});
  }

  for (const auto& f : part.faces) {
    const auto& g = f.grid;
    if (g.rows() < 2 || g.cols() < 2) out.push_back({f.id, "grid smaller than 2x2"});
    if (g.size() != g.rows() * g.cols()) out.push_back({f.id, "grid is not rectangular"});
    bool finite = std::all_of(g.points().begin(), g.points().end(), [](const Point3& p) { return p.allFinite(); });
    if (!finite) out.push_back({f.id, "non-finite coordinate"});

    std::set<std::string> seen;
    for (const auto& a : f.adjacency) {
      if (!seen.insert(a.face).second) out.push_back({f.id, "repeated adjacency to " + a.face});
      if (a.face == f.id) out.push_back({f.id, "face lists itself as adjacent"});
      if (!(a.material_angle_deg > 0.0 && a.material_angle_deg < 360.0))
        out.push_back({f.id, "material angle out of (0, 360) toward " + a.face});
      auto it = by_id.find(a.face);
      if (it == by_id.end()) {
        out.push_back({f.id, "unresolved adjacency " + a.face});
        continue;
      }
      const auto& back = it->second->adjacency;
      auto rev = std::find_if(back.begin(), back.end(), [&](const Adjacency& b) { return b.face == f.id; });
      if (rev == back.end()) {
        out.push_back({f.id, "asymmetric adjacency with " + a.face});
      } else if (std::abs(rev->material_angle_deg - a.material_angle_deg) > 1e-9) {
        out.push_back({f.id, "material angle mismatch with " + a.face});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline Box3 bounding_box(const SampledFace& face) {
  Box3 b;
  for (const auto& p : face.grid.points()) b.extend(p);
  return b;
}

inline Box3 bounding_box(const Part& part) {
  Box3 b;
  for (const auto& f : part.faces) b.extend(bounding_box(f));
  return b;
}

/// Undirected adjacency as a map face id -> neighbour ids.
inline std::map<std::string, std::set<std::string>> adjacency_graph(const Part& part) {
  std::map<std::string, std::set<std::string>> g;
  for (const auto& f : part.faces) {
    g[f.id];
    for (const auto& a : f.adjacency) {
      g[f.id].insert(a.face);
      g[a.face].insert(f.id);
    }
  }
  return g;
}

}  // namespace capp
