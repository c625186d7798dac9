#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace vortexshape {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) { return std::sqrt(dot(v, v)); }
inline double norm2(const Vec2& v) { return dot(v, v); }
inline Vec2 normalized(const Vec2& v) {
  double n = norm(v);
  return n > 0.0 ? v / n : Vec2{0.0, 0.0};
}
// rotate by -pi/2: maps an outward normal to the tangent with (tau, n) positively oriented
inline Vec2 rotate_cw(const Vec2& v) { return {v.y, -v.x}; }
inline double dist(const Vec2& a, const Vec2& b) { return norm(a - b); }

// Axis-aligned rectangle, x0 < x1, y0 < y1.
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool contains(const Vec2& p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
};

// Rectangular channel with one circular obstacle strictly inside.
struct ChannelGeometry {
  std::array<Vec2, 4> corners = {Vec2{0, -0.5}, Vec2{0, 0.5}, Vec2{2, 0.5}, Vec2{2, -0.5}};
  Vec2 obstacle_center{0.325, 0.0};
  double obstacle_radius = 0.13;
  int obstacle_segments = 0;  // 0 = choose so that chord length ~ h_min

  // Bounding rectangle of the four corners; throws if they do not form an
  // axis-aligned rectangle with positive area.
  Rect rect() const;
  // min distance from the obstacle circle to the channel walls
  double clearance() const;
  // throws std::invalid_argument on violated invariants
  void validate() const;
};

using Polyline = std::vector<Vec2>;  // closed: last vertex connects back to first

double polyline_length(const Polyline& p);
bool polyline_is_simple(const Polyline& p);
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

// Symmetric Hausdorff distance between two closed polylines, measured
// point-to-segment with vertex sampling refined 4x by midpoint insertion.
double hausdorff_distance(const Polyline& a, const Polyline& b);

// Deterministic hash-based uniform value in [0,1).
double hash01(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

}  // namespace vortexshape
