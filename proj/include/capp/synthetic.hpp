#pragma once

// Analytic sample grids and synthetic parts.
//
// All builders follow the grid orientation convention of Grid: the outward
// (air-side) normal is cross(d/dcol, d/drow).

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "capp/part_model.hpp"

namespace capp::synthetic {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg(double d) { return d * kPi / 180.0; }

/// Grid of rows x cols samples of f(u, v), u in [0,1] across columns and
/// v in [0,1] down rows.
inline Grid sample(std::size_t rows, std::size_t cols, const std::function<Point3(double, double)>& f) {
  Grid g(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      g(r, c) = f(cols > 1 ? double(c) / double(cols - 1) : 0.0, rows > 1 ? double(r) / double(rows - 1) : 0.0);
  return g;
}

/// Reverses the column order, flipping the normal.
inline Grid flipped(const Grid& g) {
  Grid out(g.rows(), g.cols());
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) out(r, c) = g(r, g.cols() - 1 - c);
  return out;
}

/// Rectangle origin + u*width*ex + v*height*ey; normal ex x ey.
inline Grid plane(const Point3& origin, const Vec3& ex, const Vec3& ey, double width, double height,
                  std::size_t rows = 5, std::size_t cols = 5) {
  return sample(rows, cols, [=](double u, double v) { return Point3(origin + u * width * ex + v * height * ey); });
}

struct Frame {
  Point3 origin = Point3::Zero();
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();
  Vec3 axis = Vec3::UnitZ();  // e1 x e2
};

/// Cylinder patch, angle across columns, height down rows. Outward normal
/// points away from the axis unless `concave`.
inline Grid cylinder(const Frame& fr, double radius, double a0, double a1, double h0, double h1, bool concave = false,
                     std::size_t rows = 7, std::size_t cols = 13) {
  Grid g = sample(rows, cols, [=](double u, double v) {
    double t = a0 + u * (a1 - a0), h = h0 + v * (h1 - h0);
    return Point3(fr.origin + radius * (std::cos(t) * fr.e1 + std::sin(t) * fr.e2) + h * fr.axis);
  });
  bool outward_if_increasing = a1 > a0;
  return outward_if_increasing == !concave ? g : flipped(g);
}

/// Cone with apex at the frame origin opening along the axis; generator
/// distance s down rows.
inline Grid cone(const Frame& fr, double half_angle, double a0, double a1, double s0, double s1, bool concave = false,
                 std::size_t rows = 7, std::size_t cols = 13) {
  Grid g = sample(rows, cols, [=](double u, double v) {
    double t = a0 + u * (a1 - a0), s = s0 + v * (s1 - s0);
    Vec3 radial = std::cos(t) * fr.e1 + std::sin(t) * fr.e2;
    return Point3(fr.origin + s * (std::cos(half_angle) * fr.axis + std::sin(half_angle) * radial));
  });
  bool outward_if_increasing = a1 > a0;
  return outward_if_increasing == !concave ? g : flipped(g);
}

/// Torus patch: major angle across columns, tube angle down rows. The tube
/// angle phi is measured from the radial direction toward the axis.
inline Grid torus(const Frame& fr, double major, double tube, double a0, double a1, double p0, double p1,
                  bool concave = false, std::size_t rows = 9, std::size_t cols = 13) {
  Grid g = sample(rows, cols, [=](double u, double v) {
    double t = a0 + u * (a1 - a0), p = p0 + v * (p1 - p0);
    Vec3 radial = std::cos(t) * fr.e1 + std::sin(t) * fr.e2;
    return Point3(fr.origin + (major + tube * std::cos(p)) * radial + tube * std::sin(p) * fr.axis);
  });
  // Outward normal of a torus with increasing angles points along
  // -(tube normal) for increasing phi; orient it by checking one sample.
  Grid out = g;
  std::size_t rc = rows / 2, cc = cols / 2;
  Vec3 tc = g(rc, cc + 1) - g(rc, cc - 1);
  Vec3 tr = g(rc + 1, cc) - g(rc - 1, cc);
  Vec3 n = tc.cross(tr);
  double t = a0 + 0.5 * (a1 - a0), p = p0 + 0.5 * (p1 - p0);
  Vec3 radial = std::cos(t) * fr.e1 + std::sin(t) * fr.e2;
  Vec3 tube_normal = std::cos(p) * radial + std::sin(p) * fr.axis;  // away from the tube centre
  bool points_out = n.dot(tube_normal) > 0;
  if (points_out == concave) out = flipped(g);
  return out;
}

/// z = x*y/scale over [x0,x1]x[y0,y1]; doubly ruled.
inline Grid hyperbolic_paraboloid(double x0, double x1, double y0, double y1, double scale, std::size_t rows = 9,
                                  std::size_t cols = 9) {
  return sample(rows, cols, [=](double u, double v) {
    double x = x0 + u * (x1 - x0), y = y0 + v * (y1 - y0);
    return Point3(x, y, x * y / scale);
  });
}

struct Gaussian {
  double cx, cy, amplitude, sigma;
};

inline double bumps(const std::vector<Gaussian>& gs, double x, double y) {
  double z = 0.0;
  for (const auto& g : gs) z += g.amplitude * std::exp(-((x - g.cx) * (x - g.cx) + (y - g.cy) * (y - g.cy)) / (g.sigma * g.sigma));
  return z;
}

/// Height field z0 + sum of Gaussians over a rectangle, normal +z.
inline Grid bump(double x0, double x1, double y0, double y1, double z0, const std::vector<Gaussian>& gs,
                 std::size_t rows = 9, std::size_t cols = 9) {
  return sample(rows, cols, [=](double u, double v) {
    double x = x0 + u * (x1 - x0), y = y0 + v * (y1 - y0);
    return Point3(x, y, z0 + bumps(gs, x, y));
  });
}

/// Builds a Part while keeping adjacency symmetric.
class PartBuilder {
public:
  explicit PartBuilder(std::string id) { part_.id = std::move(id); }

  PartBuilder& face(const std::string& id, Grid grid, std::string label = {}) {
    SampledFace f{id, std::move(grid), {}, {}};
    if (!label.empty()) f.label = std::move(label);
    part_.faces.push_back(std::move(f));
    return *this;
  }

  PartBuilder& link(const std::string& a, const std::string& b, double material_angle_deg) {
    for (auto& f : part_.faces) {
      if (f.id == a) f.adjacency.push_back({b, material_angle_deg});
      if (f.id == b) f.adjacency.push_back({a, material_angle_deg});
    }
    return *this;
  }

  [[nodiscard]] Part build() const { return part_; }

private:
  Part part_;
};

inline const Vec3 X = Vec3::UnitX(), Y = Vec3::UnitY(), Z = Vec3::UnitZ();

/// Axis-aligned block with its six faces, all edges convex.
inline Part block(double w, double d, double h, const std::string& id = "block") {
  PartBuilder b(id);
  b.face("bottom", plane({0, 0, 0}, Y, X, d, w))
      .face("top", plane({0, 0, h}, X, Y, w, d))
      .face("front", plane({0, 0, 0}, X, Z, w, h))
      .face("back", plane({0, d, 0}, Z, X, h, w))
      .face("left", plane({0, 0, 0}, Z, Y, h, d))
      .face("right", plane({w, 0, 0}, Y, Z, d, h));
  const char* sides[] = {"front", "right", "back", "left"};
  for (int i = 0; i < 4; ++i) {
    b.link("bottom", sides[i], 90).link("top", sides[i], 90).link(sides[i], sides[(i + 1) % 4], 90);
  }
  return b.build();
}

/// Six separated faces, one exact instance of every geometry type, listed in
/// type order: plane, cylinder, cone, ruled, constant-radius sweep, freeform.
inline Part one_of_each() {
  PartBuilder b("one-of-each");
  b.face("plane", plane({0, 0, 0}, X, Y, 20, 10, 7, 7), "Plan");
  Frame cyl{{100, 0, 0}, X, Y, Z};
  b.face("cylinder", cylinder(cyl, 5.0, deg(-60), deg(60), 0, 10), "Cylinder");
  Frame con{{200, 0, 0}, X, Y, Z};
  b.face("cone", cone(con, deg(30), deg(-45), deg(45), 5, 15), "ConeShaped");
  Grid hp = hyperbolic_paraboloid(-5, 5, -5, 5, 10);
  for (auto& p : hp.points()) p += Vec3(300, 0, 0);
  b.face("ruled", hp, "Ruled");
  Frame tor{{400, 0, 0}, X, Y, Z};
  b.face("sweep", torus(tor, 10.0, 3.0, deg(0), deg(90), deg(0), deg(90)), "ConstRadiusSweep");
  b.face("freeform",
         bump(480, 520, -20, 20, 0, {{495, -5, 4.0, 8.0}, {508, 6, -3.0, 6.0}, {490, 10, 2.0, 5.0}}, 11, 11),
         "Unspecified");
  return b.build();
}

/// Pump-housing-like part with 24 faces: a block with two convex edge
/// fillets, a round chamfered pocket with a toroidal bottom fillet, a
/// chamfered blind bore, a twisted ramp and a freeform dent.
inline Part carter() {
  const double L = 160, W = 100, H = 50, fr = 5;
  PartBuilder b("carter");
  b.face("F01", plane({0, 0, 0}, Y, X, W, L, 5, 9), "bottom");
  b.face("F02", plane({0, 0, 0}, X, Z, L, H - fr, 5, 9), "front");
  b.face("F03", plane({L, 0, 0}, Y, Z, W, H, 5, 7), "right side");
  b.face("F04", plane({0, W, 0}, Z, X, H - fr, L, 9, 5), "back");
  b.face("F05", plane({0, 0, 0}, Z, Y, H, W, 7, 5), "left side");
  b.face("F06", plane({0, fr, H}, X, Y, L, 20 - fr, 5, 9), "top front strip");
  b.face("F07", plane({0, 80, H}, X, Y, L, 20 - fr, 5, 9), "top back strip");
  b.face("F08", bump(0, 20, 20, 80, H, {{8, 40, -2.0, 6.0}, {12, 62, -1.5, 8.0}}, 9, 7), "freeform dent");
  b.face("F09", plane({80, 20, H}, X, Y, 30, 60, 7, 5), "top middle");
  b.face("F10", plane({110, 20, H}, X, Y, 20, 20, 5, 5), "top bore front");
  b.face("F11", plane({110, 60, H}, X, Y, 20, 20, 5, 5), "top bore back");
  b.face("F12", sample(7, 7, [&](double u, double v) {
           double x = 130 + 30 * u, y = 20 + 60 * v;
           return Point3(x, y, H - (x - 130) * (y - 20) / 180.0);
         }),
         "twisted ramp");

  Frame pocket{{50, 50, 0}, X, Y, Z};
  const char* walls[] = {"F13", "F14", "F15", "F16"};
  for (int q = 0; q < 4; ++q)
    b.face(walls[q], cylinder(pocket, 22, deg(90 * q), deg(90 * (q + 1)), 33, 47, true, 7, 13), "pocket wall");
  b.face("F17", flipped(sample(5, 48, [&](double u, double v) {
           double t = 2 * kPi * u, r = 2 + 17 * v;
           return Point3(50 + r * std::cos(t), 50 + r * std::sin(t), 30);
         })),
         "pocket bottom");
  Frame fillet{{50, 50, 33}, X, Y, Z};
  b.face("F18", torus(fillet, 19, 3, 0, 2 * kPi, deg(-90), 0, true, 5, 48), "pocket bottom fillet");
  Frame chamfer{{50, 50, 25}, X, Y, Z};
  b.face("F19", cone(chamfer, deg(45), 0, 2 * kPi, 22 * std::sqrt(2.0), 25 * std::sqrt(2.0), true, 5, 48),
         "pocket chamfer");

  Frame bore{{120, 50, 0}, X, Y, Z};
  b.face("F20", cylinder(bore, 6, 0, 2 * kPi, 30, 48, true, 7, 33), "bore");
  b.face("F21", flipped(sample(5, 33, [&](double u, double v) {
           double t = 2 * kPi * u, r = 0.5 + 5.5 * v;
           return Point3(120 + r * std::cos(t), 50 + r * std::sin(t), 30);
         })),
         "bore bottom");
  Frame bore_chamfer{{120, 50, 42}, X, Y, Z};
  b.face("F22", cone(bore_chamfer, deg(45), 0, 2 * kPi, 6 * std::sqrt(2.0), 8 * std::sqrt(2.0), true, 5, 48),
         "bore chamfer");

  Frame front_edge{{0, fr, H - fr}, Y, Z, X};
  b.face("F23", cylinder(front_edge, fr, deg(180), deg(90), 0, L, false, 9, 7), "front edge fillet");
  Frame back_edge{{0, W - fr, H - fr}, Y, Z, X};
  b.face("F24", cylinder(back_edge, fr, deg(90), deg(0), 0, L, false, 9, 7), "back edge fillet");

  // block edges
  for (const char* s : {"F02", "F03", "F04", "F05"}) b.link("F01", s, 90);
  b.link("F02", "F03", 90).link("F03", "F04", 90).link("F04", "F05", 90).link("F05", "F02", 90);
  b.link("F02", "F23", 180).link("F23", "F06", 180).link("F04", "F24", 180).link("F24", "F07", 180);
  for (const char* s : {"F06", "F07", "F12", "F23", "F24"}) b.link("F03", s, 90);
  for (const char* s : {"F06", "F07", "F08", "F23", "F24"}) b.link("F05", s, 90);
  // top
  for (const char* s : {"F08", "F09", "F10", "F12"}) b.link("F06", s, 180);
  for (const char* s : {"F08", "F09", "F11", "F12"}) b.link("F07", s, 180);
  b.link("F09", "F10", 180).link("F09", "F11", 180).link("F10", "F12", 180).link("F11", "F12", 180);
  for (const char* s : {"F06", "F07", "F08", "F09"}) b.link("F19", s, 135);
  // pocket
  for (int q = 0; q < 4; ++q) {
    b.link(walls[q], walls[(q + 1) % 4], 180).link(walls[q], "F18", 180).link(walls[q], "F19", 135);
  }
  b.link("F17", "F18", 180);
  // bore
  b.link("F20", "F21", 270).link("F20", "F22", 135);
  return b.build();
}

/// Stepped block with ten planar faces and convex and concave edges.
inline Part stepped_block() {
  PartBuilder b("stepped");
  const double L = 60, W = 40, Hh = 30, Hl = 15;
  b.face("bottom", plane({0, 0, 0}, Y, X, W, L));
  b.face("left", plane({0, 0, 0}, Z, Y, Hh, W));
  b.face("right", plane({L, 0, 0}, Y, Z, W, Hl));
  b.face("riser", plane({L / 2, 0, Hl}, Y, Z, W, Hh - Hl));
  b.face("top-high", plane({0, 0, Hh}, X, Y, L / 2, W));
  b.face("top-low", plane({L / 2, 0, Hl}, X, Y, L / 2, W));
  b.face("front-high", plane({0, 0, 0}, X, Z, L / 2, Hh));
  b.face("front-low", plane({L / 2, 0, 0}, X, Z, L / 2, Hl));
  b.face("back-high", plane({0, W, 0}, Z, X, Hh, L / 2));
  b.face("back-low", plane({L / 2, W, 0}, Z, X, Hl, L / 2));
  for (const char* s : {"left", "right", "front-high", "front-low", "back-high", "back-low"}) b.link("bottom", s, 90);
  b.link("left", "top-high", 90).link("left", "front-high", 90).link("left", "back-high", 90);
  b.link("right", "top-low", 90).link("right", "front-low", 90).link("right", "back-low", 90);
  b.link("riser", "top-high", 90).link("riser", "top-low", 270);
  b.link("riser", "front-high", 90).link("riser", "back-high", 90);
  b.link("top-high", "front-high", 90).link("top-high", "back-high", 90);
  b.link("top-low", "front-low", 90).link("top-low", "back-low", 90);
  b.link("front-high", "front-low", 180).link("back-high", "back-low", 180);
  return b.build();
}

/// Extruded S-shaped web in front of a blocking plate: reachable only along
/// its rulings, from above and from below.
inline Part web_with_plate() {
  PartBuilder b("web");
  Grid web = sample(5, 11, [](double u, double v) {
    double x = 40 * u;
    return Point3(x, 3.0 * std::sin(2 * kPi * x / 40.0), 20 * v);
  });
  // cross(d/dx, d/dz) points to -y: toward the plate.
  b.face("web", web, "thin web");
  b.face("plate", plane({-30, -10, -1}, Z, X, 22, 100), "blocking plate");
  return b.build();
}

/// Standalone external cone flank.
inline Part cone_flank() {
  PartBuilder b("cone-flank");
  Frame fr{{0, 0, 20}, Y, X, -Z};
  b.face("cone", cone(fr, deg(30), deg(-45), deg(45), 5, 20));
  return b.build();
}

/// Two faces: a 20x50 floor and a rim face `depth` above it.
inline Part floor_below_rim(double depth) {
  PartBuilder b("floor");
  b.face("floor", plane({0, 0, 0}, X, Y, 20, 50));
  b.face("rim", plane({40, 0, depth}, X, Y, 20, 50));
  return b.build();
}

/// Plane that runs into a concave fillet of the given radius and then a
/// vertical wall, extruded along x. Profile samples are evenly spaced.
inline Part fillet_face(double radius) {
  const double flat = 10.0;
  const double arc = radius * kPi / 2;
  const double total = 2 * flat + arc;
  const std::size_t n = 29;
  PartBuilder b("fillet");
  Grid g = sample(5, n, [=](double u, double v) {
    double s = u * total, x = 30 * v;
    // profile in (y, z): floor from y=-flat..0 at z=0, arc up to the wall y=radius
    if (s <= flat) return Point3(x, -flat + s, 0);
    if (s <= flat + arc) {
      double t = (s - flat) / radius;  // 0..pi/2
      return Point3(x, radius * std::sin(t), radius - radius * std::cos(t));
    }
    return Point3(x, radius, radius + (s - flat - arc));
  });
  // cross(d/ds, d/dx) = (0,1,0)x(1,0,0) = -z on the floor: flip for +z.
  b.face("fillet", flipped(g));
  return b.build();
}

/// Block with a floating internal face under its top: the internal face has
/// no admissible direction.
inline Part block_with_hidden_face() {
  Part p = block(40, 40, 20, "hidden");
  p.faces.push_back({"hidden", plane({10, 10, 10}, X, Y, 20, 20), {}, std::string("internal face")});
  return p;
}

/// Synthetic plate with a grid of round pockets and `strips` top strips
/// between pocket rows; 5 + 7 * nx * ny + strips faces.
inline Part pocket_plate(int nx, int ny, int strips = 0) {
  const double pitch = 60, H = 40;
  const double L = pitch * nx, W = pitch * ny;
  PartBuilder b("plate");
  b.face("bottom", plane({0, 0, 0}, Y, X, W, L));
  b.face("front", plane({0, 0, 0}, X, Z, L, H));
  b.face("right", plane({L, 0, 0}, Y, Z, W, H));
  b.face("back", plane({0, W, 0}, Z, X, H, L));
  b.face("left", plane({0, 0, 0}, Z, Y, H, W));
  for (const char* s : {"front", "right", "back", "left"}) b.link("bottom", s, 90);
  b.link("front", "right", 90).link("right", "back", 90).link("back", "left", 90).link("left", "front", 90);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const std::string p = "P" + std::to_string(i) + "_" + std::to_string(j) + "_";
      const double cx = pitch * (i + 0.5), cy = pitch * (j + 0.5);
      Frame axis{{cx, cy, 0}, X, Y, Z};
      std::string w[4];
      for (int q = 0; q < 4; ++q) {
        w[q] = p + "wall" + std::to_string(q);
        b.face(w[q], cylinder(axis, 20, deg(90 * q), deg(90 * (q + 1)), 23, 37, true, 5, 9));
      }
      b.face(p + "floor", flipped(sample(4, 24, [=](double u, double v) {
               double t = 2 * kPi * u, r = 2 + 15 * v;
               return Point3(cx + r * std::cos(t), cy + r * std::sin(t), 20);
             })));
      Frame fil{{cx, cy, 23}, X, Y, Z};
      b.face(p + "fillet", torus(fil, 17, 3, 0, 2 * kPi, deg(-90), 0, true, 5, 48));
      Frame ch{{cx, cy, 17}, X, Y, Z};
      b.face(p + "chamfer", cone(ch, deg(45), 0, 2 * kPi, 20 * std::sqrt(2.0), 23 * std::sqrt(2.0), true, 4, 48));
      for (int q = 0; q < 4; ++q)
        b.link(w[q], w[(q + 1) % 4], 180).link(w[q], p + "fillet", 180).link(w[q], p + "chamfer", 135);
      b.link(p + "floor", p + "fillet", 180);
    }
  }
  for (int j = 0; j < strips && j + 1 < ny; ++j) {
    const std::string id = "strip" + std::to_string(j);
    b.face(id, plane({0, pitch * (j + 1) - 5, H}, X, Y, L, 10, 3, 9));
    b.link(id, "left", 90).link(id, "right", 90);
  }
  return b.build();
}

/// Applies x -> R x + t to every sample.
inline Part moved(Part p, const Eigen::Matrix3d& R, const Vec3& t) {
  for (auto& f : p.faces)
    for (auto& q : f.grid.points()) q = R * q + t;
  return p;
}

struct Fixture {
  std::string file;
  Part part;
};

/// Parts shipped as JSON under data/parts.
inline std::vector<Fixture> shipped_fixtures() {
  return {{"block.json", block(80, 50, 30)},
          {"one_of_each.json", one_of_each()},
          {"carter.json", carter()},
          {"stepped.json", stepped_block()},
          {"web.json", web_with_plate()},
          {"cone_flank.json", cone_flank()},
          {"floor.json", floor_below_rim(12)},
          {"fillet.json", fillet_face(4)},
          {"hidden.json", block_with_hidden_face()},
          {"plate_small.json", pocket_plate(2, 2, 1)}};
}

}  // namespace capp::synthetic
