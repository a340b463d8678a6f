#pragma once

// Least-squares primitive fitting and differential estimates on sample grids.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "capp/part_model.hpp"

namespace capp {

class FitError : public Error {
public:
  using Error::Error;
};

namespace detail {

inline Vec3 tangent_along_cols(const Grid& g, std::size_t r, std::size_t c) {
  const std::size_t n = g.cols();
  if (n < 2) return Vec3::Zero();
  if (c > 0 && c + 1 < n) return 0.5 * (g(r, c + 1) - g(r, c - 1));
  if (n == 2) return g(r, 1) - g(r, 0);
  if (c == 0) return 0.5 * (-3.0 * g(r, 0) + 4.0 * g(r, 1) - g(r, 2));
  return 0.5 * (3.0 * g(r, n - 1) - 4.0 * g(r, n - 2) + g(r, n - 3));
}

inline Vec3 tangent_along_rows(const Grid& g, std::size_t r, std::size_t c) {
  const std::size_t n = g.rows();
  if (n < 2) return Vec3::Zero();
  if (r > 0 && r + 1 < n) return 0.5 * (g(r + 1, c) - g(r - 1, c));
  if (n == 2) return g(1, c) - g(0, c);
  if (r == 0) return 0.5 * (-3.0 * g(0, c) + 4.0 * g(1, c) - g(2, c));
  return 0.5 * (3.0 * g(n - 1, c) - 4.0 * g(n - 2, c) + g(n - 3, c));
}

/// Orthonormal pair perpendicular to a unit vector.
inline std::pair<Vec3, Vec3> orthonormal_basis(const Vec3& a) {
  Vec3 helper = std::abs(a.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  Vec3 e1 = a.cross(helper).normalized();
  Vec3 e2 = a.cross(e1);
  return {e1, e2};
}

struct CloudFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  int n_inputs = 0;
  int n_values = 0;
  [[nodiscard]] int inputs() const { return n_inputs; }
  [[nodiscard]] int values() const { return n_values; }
};

inline double rms(const Eigen::VectorXd& r) { return r.size() ? std::sqrt(r.squaredNorm() / double(r.size())) : 0.0; }

// Runs LM from x; returns false when the evaluation budget is exhausted.
template <class F>
bool minimize(const F& functor, Eigen::VectorXd& x, int iteration_budget) {
  Eigen::NumericalDiff<F> diff(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<F>, double> lm(diff);
  lm.parameters.maxfev = iteration_budget * (static_cast<int>(x.size()) + 1);
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  auto status = lm.minimize(x);
  if (!x.allFinite()) return false;
  using namespace Eigen::LevenbergMarquardtSpace;
  return status != TooManyFunctionEvaluation && status != ImproperInputParameters;
}

}  // namespace detail

/// Unit normal per sample, row-major, oriented as cross(d/dcol, d/drow).
/// Degenerate samples get a zero vector.
inline std::vector<Vec3> sample_normals(const Grid& g) {
  std::vector<Vec3> out(g.size(), Vec3::Zero());
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      Vec3 n = detail::tangent_along_cols(g, r, c).cross(detail::tangent_along_rows(g, r, c));
      double len = n.norm();
      if (len > 1e-14) out[r * g.cols() + c] = n / len;
    }
  }
  return out;
}

inline Vec3 mean_normal(const std::vector<Vec3>& normals) {
  Vec3 s = Vec3::Zero();
  for (const auto& n : normals) s += n;
  return s;
}

struct PlaneFit {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;  // normal . x = offset
  double rms_residual = 0.0;
};

inline PlaneFit fit_plane(const Grid& g) {
  const auto& pts = g.points();
  if (g.rows() < 2 || g.cols() < 2) throw FitError("underdetermined fit");
  Point3 centroid = Point3::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= double(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) cov += (p - centroid) * (p - centroid).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const auto& ev = es.eigenvalues();
  if (!(ev(2) > 0.0) || ev(1) <= 1e-12 * ev(2)) throw FitError("underdetermined fit");

  Vec3 n = es.eigenvectors().col(0).normalized();
  if (n.dot(mean_normal(sample_normals(g))) < 0.0) n = -n;

  PlaneFit fit;
  fit.normal = n;
  fit.offset = n.dot(centroid);
  double ss = 0.0;
  for (const auto& p : pts) ss += std::pow(n.dot(p) - fit.offset, 2);
  fit.rms_residual = std::sqrt(ss / double(pts.size()));
  return fit;
}

struct CylinderFit {
  Point3 axis_point = Point3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double radius = 0.0;
  double rms_residual = 0.0;
};

struct FitOptions {
  int iteration_budget = 100;
  // Fits whose radius exceeds this multiple of the sample extent count as failed.
  double max_radius_ratio = 1e3;
};

inline CylinderFit fit_cylinder(const Grid& g, const FitOptions& opt = {}) {
  if (g.rows() < 3 || g.cols() < 3) throw FitError("fit failed: grid smaller than 3x3");
  const auto& pts = g.points();
  const auto normals = sample_normals(g);

  Eigen::Matrix3d nn = Eigen::Matrix3d::Zero();
  for (const auto& n : normals) nn += n * n.transpose();
  nn /= double(normals.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(nn);
  // Cylinder normals are perpendicular to the axis and must spread over a plane.
  if (es.eigenvalues()(1) < 1e-8) throw FitError("fit failed: normals do not spread");
  Vec3 a0 = es.eigenvectors().col(0).normalized();
  auto [e1, e2] = detail::orthonormal_basis(a0);

  // Algebraic circle fit on the projection.
  Eigen::MatrixXd A(pts.size(), 3);
  Eigen::VectorXd b(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double x = pts[i].dot(e1), y = pts[i].dot(e2);
    A.row(i) << x, y, 1.0;
    b(i) = -(x * x + y * y);
  }
  Eigen::Vector3d def = A.colPivHouseholderQr().solve(b);
  double cx = -def(0) / 2, cy = -def(1) / 2;
  double r2 = cx * cx + cy * cy - def(2);
  if (!(r2 > 0.0) || !std::isfinite(r2)) throw FitError("fit failed: degenerate circle");
  Point3 p0 = cx * e1 + cy * e2;

  struct Residual : detail::CloudFunctor {
    const std::vector<Point3>* pts;
    Point3 p0;
    Vec3 a0, e1, e2;
    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
      Point3 p = p0 + x(0) * e1 + x(1) * e2;
      Vec3 a = (a0 + x(2) * e1 + x(3) * e2).normalized();
      for (std::size_t i = 0; i < pts->size(); ++i) f(i) = ((*pts)[i] - p).cross(a).norm() - x(4);
      return 0;
    }
  } fn;
  fn.n_inputs = 5;
  fn.n_values = static_cast<int>(pts.size());
  fn.pts = &pts;
  fn.p0 = p0;
  fn.a0 = a0;
  fn.e1 = e1;
  fn.e2 = e2;

  Eigen::VectorXd x(5);
  x << 0, 0, 0, 0, std::sqrt(r2);
  if (!detail::minimize(fn, x, opt.iteration_budget)) throw FitError("fit failed: no convergence");

  CylinderFit fit;
  fit.axis = (a0 + x(2) * e1 + x(3) * e2).normalized();
  Point3 p = p0 + x(0) * e1 + x(1) * e2;
  // Canonical axis point: foot of the centroid on the axis.
  Point3 centroid = Point3::Zero();
  for (const auto& q : pts) centroid += q;
  centroid /= double(pts.size());
  fit.axis_point = p + fit.axis * (centroid - p).dot(fit.axis);
  fit.radius = std::abs(x(4));
  Eigen::VectorXd f(pts.size());
  fn(x, f);
  fit.rms_residual = detail::rms(f);

  double extent = bounding_box(SampledFace{"", g, {}, {}}).diagonal();
  if (!(fit.radius > 0.0) || fit.radius > opt.max_radius_ratio * std::max(extent, 1e-9))
    throw FitError("fit failed: radius out of range");
  return fit;
}

struct ConeFit {
  Point3 apex = Point3::Zero();
  Vec3 axis = Vec3::UnitZ();  // points from the apex into the sampled nappe
  double half_angle = 0.0;    // radians
  double rms_residual = 0.0;
};

inline ConeFit fit_cone(const Grid& g, const FitOptions& opt = {}) {
  if (g.rows() < 3 || g.cols() < 3) throw FitError("fit failed: grid smaller than 3x3");
  const auto& pts = g.points();
  const auto normals = sample_normals(g);

  // Cone normals make a constant angle with the axis: they lie on a small circle.
  Vec3 mean = Vec3::Zero();
  for (const auto& n : normals) mean += n;
  mean /= double(normals.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d nn = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < normals.size(); ++i) {
    const auto& n = normals[i];
    cov += (n - mean) * (n - mean).transpose();
    nn += n * n.transpose();
    rhs += n * n.dot(pts[i]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  if (es.eigenvalues()(1) < 1e-10 * normals.size()) throw FitError("fit failed: normals do not spread");
  Vec3 a0 = es.eigenvectors().col(0).normalized();

  // Every tangent plane passes through the apex.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> en(nn / double(normals.size()));
  if (en.eigenvalues()(0) < 1e-8) throw FitError("fit failed: apex undetermined");
  Point3 apex0 = nn.ldlt().solve(rhs);
  if (!apex0.allFinite()) throw FitError("fit failed: apex undetermined");

  double hsum = 0.0;
  for (const auto& p : pts) hsum += (p - apex0).dot(a0);
  if (hsum < 0.0) a0 = -a0;
  double alpha0 = 0.0;
  for (const auto& p : pts) {
    Vec3 q = p - apex0;
    double h = q.dot(a0);
    alpha0 += std::atan2((q - h * a0).norm(), h);
  }
  alpha0 /= double(pts.size());
  if (!(alpha0 > 1e-3 && alpha0 < M_PI / 2 - 1e-3)) throw FitError("fit failed: half-angle out of range");

  auto [e1, e2] = detail::orthonormal_basis(a0);
  struct Residual : detail::CloudFunctor {
    const std::vector<Point3>* pts;
    Point3 apex0;
    Vec3 a0, e1, e2;
    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
      Point3 apex = apex0 + x(0) * a0 + x(1) * e1 + x(2) * e2;
      Vec3 a = (a0 + x(3) * e1 + x(4) * e2).normalized();
      double ca = std::cos(x(5)), sa = std::sin(x(5));
      for (std::size_t i = 0; i < pts->size(); ++i) {
        Vec3 q = (*pts)[i] - apex;
        double h = q.dot(a);
        double rho = (q - h * a).norm();
        f(i) = rho * ca - h * sa;
      }
      return 0;
    }
  } fn;
  fn.n_inputs = 6;
  fn.n_values = static_cast<int>(pts.size());
  fn.pts = &pts;
  fn.apex0 = apex0;
  fn.a0 = a0;
  fn.e1 = e1;
  fn.e2 = e2;

  Eigen::VectorXd x(6);
  x << 0, 0, 0, 0, 0, alpha0;
  if (!detail::minimize(fn, x, opt.iteration_budget)) throw FitError("fit failed: no convergence");

  ConeFit fit;
  fit.apex = apex0 + x(0) * a0 + x(1) * e1 + x(2) * e2;
  fit.axis = (a0 + x(3) * e1 + x(4) * e2).normalized();
  fit.half_angle = x(5);
  Eigen::VectorXd f(pts.size());
  fn(x, f);
  fit.rms_residual = detail::rms(f);
  if (!(fit.half_angle > 1e-3 && fit.half_angle < M_PI / 2 - 1e-3)) throw FitError("fit failed: half-angle out of range");
  return fit;
}

enum class GridFamily { Rows, Cols };

struct RuledFit {
  double deviation = 0.0;  // max distance of samples from their iso-line chord
  GridFamily family = GridFamily::Rows;
  Vec3 ruling = Vec3::UnitX();
};

namespace detail {

template <class At>
double family_line_deviation(std::size_t lines, std::size_t len, At at, Vec3& mean_dir) {
  double worst = 0.0;
  mean_dir = Vec3::Zero();
  Vec3 ref = Vec3::Zero();
  for (std::size_t l = 0; l < lines; ++l) {
    const Point3 a = at(l, 0), b = at(l, len - 1);
    Vec3 d = b - a;
    double dl = d.norm();
    if (dl < 1e-12) return std::numeric_limits<double>::infinity();
    d /= dl;
    if (ref.isZero()) ref = d;
    mean_dir += d.dot(ref) < 0 ? -d : d;
    for (std::size_t k = 1; k + 1 < len; ++k) {
      Vec3 q = at(l, k) - a;
      worst = std::max(worst, (q - d * q.dot(d)).norm());
    }
  }
  if (mean_dir.norm() > 0) mean_dir.normalize();
  return worst;
}

}  // namespace detail

/// Straightness of the straighter iso-parameter family.
inline RuledFit ruled_deviation(const Grid& g) {
  Vec3 dir_rows, dir_cols;
  double dev_rows = detail::family_line_deviation(
      g.rows(), g.cols(), [&](std::size_t l, std::size_t k) { return g(l, k); }, dir_rows);
  double dev_cols = detail::family_line_deviation(
      g.cols(), g.rows(), [&](std::size_t l, std::size_t k) { return g(k, l); }, dir_cols);
  RuledFit out;
  if (dev_rows <= dev_cols) {
    out = {dev_rows, GridFamily::Rows, dir_rows};
  } else {
    out = {dev_cols, GridFamily::Cols, dir_cols};
  }
  return out;
}

struct SweepFit {
  double radius = 0.0;
  double spread = std::numeric_limits<double>::infinity();
  GridFamily family = GridFamily::Rows;
};

struct SweepOptions {
  double min_radius = 0.1;
  double max_radius = 500.0;
};

/// Offsets interior samples along their normals by the single radius that best
/// collapses every line of one iso-parameter family to a point; reports the
/// worst remaining spread. Samples on the grid border are ignored.
inline SweepFit sweep_collapse(const Grid& g, const SweepOptions& opt = {}) {
  SweepFit best;
  if (g.rows() < 5 || g.cols() < 5) return best;
  const auto normals = sample_normals(g);
  const std::size_t r0 = 1, r1 = g.rows() - 1, c0 = 1, c1 = g.cols() - 1;

  auto run = [&](GridFamily fam) {
    // line l, position k -> (row, col)
    auto rc = [&](std::size_t l, std::size_t k) {
      return fam == GridFamily::Rows ? std::pair{r0 + l, c0 + k} : std::pair{r0 + k, c0 + l};
    };
    const std::size_t lines = fam == GridFamily::Rows ? r1 - r0 : c1 - c0;
    const std::size_t len = fam == GridFamily::Rows ? c1 - c0 : r1 - r0;
    double num = 0.0, den = 0.0;
    for (std::size_t l = 0; l < lines; ++l) {
      Point3 pm = Point3::Zero();
      Vec3 nm = Vec3::Zero();
      for (std::size_t k = 0; k < len; ++k) {
        auto [r, c] = rc(l, k);
        pm += g(r, c);
        nm += normals[r * g.cols() + c];
      }
      pm /= double(len);
      nm /= double(len);
      for (std::size_t k = 0; k < len; ++k) {
        auto [r, c] = rc(l, k);
        Vec3 dn = normals[r * g.cols() + c] - nm;
        num += (g(r, c) - pm).dot(dn);
        den += dn.squaredNorm();
      }
    }
    if (den < 1e-12) return;
    double radius = num / den;
    double mag = std::clamp(std::abs(radius), opt.min_radius, opt.max_radius);
    radius = std::copysign(mag, radius);
    double spread = 0.0;
    for (std::size_t l = 0; l < lines; ++l) {
      std::vector<Point3> q(len);
      Point3 qm = Point3::Zero();
      for (std::size_t k = 0; k < len; ++k) {
        auto [r, c] = rc(l, k);
        q[k] = g(r, c) - radius * normals[r * g.cols() + c];
        qm += q[k];
      }
      qm /= double(len);
      for (const auto& p : q) spread = std::max(spread, (p - qm).norm());
    }
    if (spread < best.spread) best = {std::abs(radius), spread, fam};
  };
  run(GridFamily::Rows);
  run(GridFamily::Cols);
  return best;
}

/// Signed principal curvatures at an interior sample; positive means the
/// surface bends toward its outward normal (concave seen from the air side).
inline std::pair<double, double> principal_curvatures(const Grid& g, std::size_t r, std::size_t c) {
  Vec3 pc = 0.5 * (g(r, c + 1) - g(r, c - 1));
  Vec3 pr = 0.5 * (g(r + 1, c) - g(r - 1, c));
  Vec3 pcc = g(r, c + 1) - 2.0 * g(r, c) + g(r, c - 1);
  Vec3 prr = g(r + 1, c) - 2.0 * g(r, c) + g(r - 1, c);
  Vec3 prc = 0.25 * (g(r + 1, c + 1) - g(r + 1, c - 1) - g(r - 1, c + 1) + g(r - 1, c - 1));
  Vec3 n = pc.cross(pr);
  double nl = n.norm();
  if (nl < 1e-14) return {0.0, 0.0};
  n /= nl;
  double E = pc.dot(pc), F = pc.dot(pr), G = pr.dot(pr);
  double L = pcc.dot(n), M = prc.dot(n), N = prr.dot(n);
  double det = E * G - F * F;
  if (det < 1e-18) return {0.0, 0.0};
  double H = (E * N - 2.0 * F * M + G * L) / (2.0 * det);
  double K = (L * N - M * M) / det;
  double disc = std::sqrt(std::max(H * H - K, 0.0));
  return {H + disc, H - disc};
}

/// Smallest concave radius of curvature over interior samples; +inf when the
/// face has no concavity.
inline double min_concave_radius(const Grid& g, double flat_curvature = 1e-6) {
  double kmax = 0.0;
  for (std::size_t r = 1; r + 1 < g.rows(); ++r)
    for (std::size_t c = 1; c + 1 < g.cols(); ++c) kmax = std::max(kmax, principal_curvatures(g, r, c).first);
  return kmax > flat_curvature ? 1.0 / kmax : std::numeric_limits<double>::infinity();
}

}  // namespace capp
