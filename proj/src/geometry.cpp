#include "vortexshape/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace vortexshape {

Rect ChannelGeometry::rect() const {
  double x0 = corners[0].x, x1 = corners[0].x;
  double y0 = corners[0].y, y1 = corners[0].y;
  for (const Vec2& c : corners) {
    x0 = std::min(x0, c.x);
    x1 = std::max(x1, c.x);
    y0 = std::min(y0, c.y);
    y1 = std::max(y1, c.y);
  }
  Rect r{x0, y0, x1, y1};
  if (!(r.width() > 0.0) || !(r.height() > 0.0))
    throw std::invalid_argument("channel corners do not span a rectangle of positive area");
  // every corner of the rectangle must be hit exactly once
  std::array<bool, 4> seen{false, false, false, false};
  const Vec2 expect[4] = {{x0, y0}, {x0, y1}, {x1, y0}, {x1, y1}};
  for (const Vec2& c : corners) {
    bool matched = false;
    for (int k = 0; k < 4; ++k) {
      if (!seen[k] && c.x == expect[k].x && c.y == expect[k].y) {
        seen[k] = true;
        matched = true;
        break;
      }
    }
    if (!matched)
      throw std::invalid_argument("channel corners are not an axis-aligned rectangle");
  }
  return r;
}

double ChannelGeometry::clearance() const {
  Rect r = rect();
  double d = std::numeric_limits<double>::max();
  d = std::min(d, obstacle_center.x - obstacle_radius - r.x0);
  d = std::min(d, r.x1 - (obstacle_center.x + obstacle_radius));
  d = std::min(d, obstacle_center.y - obstacle_radius - r.y0);
  d = std::min(d, r.y1 - (obstacle_center.y + obstacle_radius));
  return d;
}

void ChannelGeometry::validate() const {
  if (!(obstacle_radius > 0.0)) throw std::invalid_argument("obstacle_radius must be > 0");
  rect();  // validates the corner layout
  if (!(clearance() > 0.0))
    throw std::invalid_argument("obstacle must lie strictly inside the channel");
  if (obstacle_segments < 0)
    throw std::invalid_argument("obstacle_segments must be >= 0");
}

double polyline_length(const Polyline& p) {
  double len = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) len += dist(p[i], p[(i + 1) % p.size()]);
  return len;
}

namespace {

bool segments_intersect_strict(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return cross(q - p, r - p);
  };
  double o1 = orient(a, b, c), o2 = orient(a, b, d);
  double o3 = orient(c, d, a), o4 = orient(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 &&
         o4 != 0;
}

}  // namespace

bool polyline_is_simple(const Polyline& p) {
  const int n = static_cast<int>(p.size());
  if (n < 3) return false;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      // skip segments sharing an endpoint
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect_strict(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n])) return false;
    }
  }
  return true;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = norm2(ab);
  if (len2 == 0.0) return dist(p, a);
  double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return dist(p, a + t * ab);
}

namespace {

Polyline refine_by_midpoints(const Polyline& p, int rounds) {
  Polyline cur = p;
  for (int r = 0; r < rounds; ++r) {
    Polyline next;
    next.reserve(cur.size() * 2);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const Vec2& a = cur[i];
      const Vec2& b = cur[(i + 1) % cur.size()];
      next.push_back(a);
      next.push_back((a + b) * 0.5);
    }
    cur = std::move(next);
  }
  return cur;
}

double directed_hausdorff(const Polyline& pts, const Polyline& target) {
  double worst = 0.0;
  for (const Vec2& p : pts) {
    double best = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < target.size(); ++i) {
      best = std::min(best, point_segment_distance(p, target[i], target[(i + 1) % target.size()]));
      if (best == 0.0) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double hausdorff_distance(const Polyline& a, const Polyline& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("hausdorff_distance: empty polyline");
  Polyline ra = refine_by_midpoints(a, 2);
  Polyline rb = refine_by_midpoints(b, 2);
  return std::max(directed_hausdorff(ra, b), directed_hausdorff(rb, a));
}

double hash01(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 over the mixed key
  std::uint64_t z = seed ^ (a * 0x9E3779B97F4A7C15ull) ^ (b * 0xBF58476D1CE4E5B9ull);
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z = z ^ (z >> 31);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

}  // namespace vortexshape
