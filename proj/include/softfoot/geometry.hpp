#pragma once

// Small geometric primitives shared across the library: planar rigid
// transforms for the sagittal-plane chains, Euler-angle rotations for the
// floating root, axis-aligned rectangles, and 2D convex hulls.
//
// Units: millimetres, Newtons, radians unless a name says otherwise.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace softfoot {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;

inline constexpr double kGravity = 9.81;  // N per kg

// Planar rotation by angle (radians), counter-clockwise in the x-z plane.
struct Rot2 {
  double c = 1.0, s = 0.0;
  static Rot2 from_angle(double a) { return {std::cos(a), std::sin(a)}; }
  Vec2 operator*(const Vec2& v) const { return {c * v.x() - s * v.y(), s * v.x() + c * v.y()}; }
  Rot2 operator*(const Rot2& o) const { return {c * o.c - s * o.s, s * o.c + c * o.s}; }
};

// Planar affine transform p -> R p + t.
struct Affine2 {
  Rot2 R;
  Vec2 t = Vec2::Zero();
  Vec2 operator*(const Vec2& p) const { return R * p + t; }
  Affine2 operator*(const Affine2& o) const { return {R * o.R, R * o.t + t}; }
  // Rotation by `a` about a fixed pivot point.
  static Affine2 about(const Vec2& pivot, double a) {
    Rot2 r = Rot2::from_angle(a);
    return {r, pivot - r * pivot};
  }
};

inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

// Euler XYZ conventions for the root pose: R = Rz(yaw) * Ry(pitch) * Rx(roll).
// Mirroring the world about the x-z plane maps (roll, pitch, yaw) to
// (-roll, pitch, -yaw) exactly, which the symmetry tests rely on.
inline Mat3 euler_to_matrix(double roll, double pitch, double yaw) {
  const double ca = std::cos(roll), sa = std::sin(roll);
  const double cb = std::cos(pitch), sb = std::sin(pitch);
  const double cc = std::cos(yaw), sc = std::sin(yaw);
  Mat3 R;
  R << cb * cc, sa * sb * cc - ca * sc, ca * sb * cc + sa * sc,
       cb * sc, sa * sb * sc + ca * cc, ca * sb * sc - sa * cc,
       -sb,     sa * cb,                ca * cb;
  return R;
}

// Derivatives of euler_to_matrix with respect to roll, pitch, yaw.
inline void euler_derivatives(double roll, double pitch, double yaw, Mat3 out[3]) {
  const double ca = std::cos(roll), sa = std::sin(roll);
  const double cb = std::cos(pitch), sb = std::sin(pitch);
  const double cc = std::cos(yaw), sc = std::sin(yaw);
  // d/d roll
  out[0] << 0, ca * sb * cc + sa * sc, -sa * sb * cc + ca * sc,
            0, ca * sb * sc - sa * cc, -sa * sb * sc - ca * cc,
            0, ca * cb,                -sa * cb;
  // d/d pitch
  out[1] << -sb * cc, sa * cb * cc, ca * cb * cc,
            -sb * sc, sa * cb * sc, ca * cb * sc,
            -cb,      -sa * sb,     -ca * sb;
  // d/d yaw
  out[2] << -cb * sc, -sa * sb * sc - ca * cc, -ca * sb * sc + sa * cc,
            cb * cc,  sa * sb * cc - ca * sc,  ca * sb * cc + sa * sc,
            0,        0,                       0;
}

// Extracts XYZ Euler angles from a rotation matrix (inverse of the above).
inline Vec3 matrix_to_euler(const Mat3& R) {
  const double sb = -R(2, 0);
  const double pitch = std::asin(std::clamp(sb, -1.0, 1.0));
  double roll, yaw;
  if (std::abs(sb) < 1.0 - 1e-12) {
    roll = std::atan2(R(2, 1), R(2, 2));
    yaw = std::atan2(R(1, 0), R(0, 0));
  } else {
    roll = std::atan2(-R(1, 2), R(1, 1));
    yaw = 0.0;
  }
  return {roll, pitch, yaw};
}

// Axis-aligned rectangle in the ground plane.
struct Rect {
  double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
  double width() const { return x_max - x_min; }
  double length() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
  bool strictly_contains(double x, double y) const {
    return x > x_min && x < x_max && y > y_min && y < y_max;
  }
};

// Convex hull of 2D points (monotone chain), counter-clockwise, no
// duplicated endpoint. Collinear boundary points are dropped.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  if (pts.size() < 3) return pts;
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return a == b; }),
            pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vec2> hull(2 * pts.size());
  size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    const auto& p = pts[i];
    while (k >= lower && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

// True when the point lies inside or on the hull (tolerance in mm).
inline bool point_in_convex_polygon(const Vec2& p, const std::vector<Vec2>& hull,
                                    double tol = 1e-6) {
  if (hull.empty()) throw std::invalid_argument("point_in_convex_polygon: empty polygon");
  if (hull.size() == 1) return (p - hull[0]).norm() <= tol;
  if (hull.size() == 2) {
    const Vec2 d = hull[1] - hull[0];
    const double len = d.norm();
    const double t = std::clamp((p - hull[0]).dot(d) / (len * len), 0.0, 1.0);
    return (p - (hull[0] + t * d)).norm() <= tol;
  }
  for (size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    const Vec2 e = b - a;
    const double side = e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x());
    if (side < -tol * e.norm()) return false;
  }
  return true;
}

// C2 quintic smoothstep on [0, 1].
inline double smoothstep5(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
}

inline double smoothstep5_deriv(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (t - 1.0) * (t - 1.0);
}

}  // namespace softfoot
