#include "vortexshape/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "vortexshape/dofmap.hpp"

namespace vortexshape {

const char* tag_name(Tag t) {
  switch (t) {
    case Tag::IN: return "IN";
    case Tag::WALL: return "WALL";
    case Tag::OUT: return "OUT";
    case Tag::FREE: return "FREE";
  }
  return "?";
}

Tag tag_from_name(const std::string& name) {
  if (name == "IN") return Tag::IN;
  if (name == "WALL") return Tag::WALL;
  if (name == "OUT") return Tag::OUT;
  if (name == "FREE") return Tag::FREE;
  throw std::invalid_argument("unknown boundary tag: " + name);
}

double Mesh::triangle_area(int t) const {
  const auto& tr = triangles[t];
  return 0.5 * cross(vertices[tr[1]] - vertices[tr[0]], vertices[tr[2]] - vertices[tr[0]]);
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < num_triangles(); ++t) a += triangle_area(t);
  return a;
}

double Mesh::free_perimeter() const {
  double p = 0.0;
  for (const auto& e : boundary_edges)
    if (e.tag == Tag::FREE) p += dist(vertices[e.a], vertices[e.b]);
  return p;
}

bool Mesh::has_tag(Tag t) const {
  for (const auto& e : boundary_edges)
    if (e.tag == t) return true;
  return false;
}

std::vector<int> Mesh::free_loop() const {
  // successor map over FREE edges; each FREE vertex must have degree 2
  std::map<int, std::array<int, 2>> nbr;
  int nfree = 0;
  for (const auto& e : boundary_edges) {
    if (e.tag != Tag::FREE) continue;
    ++nfree;
    for (int k = 0; k < 2; ++k) {
      int v = k == 0 ? e.a : e.b;
      int w = k == 0 ? e.b : e.a;
      auto [it, inserted] = nbr.try_emplace(v, std::array<int, 2>{-1, -1});
      auto& slots = it->second;
      if (slots[0] == -1)
        slots[0] = w;
      else if (slots[1] == -1)
        slots[1] = w;
      else
        throw std::runtime_error("FREE boundary is not a simple polyline (vertex degree > 2)");
    }
  }
  if (nfree == 0) return {};
  std::vector<int> loop;
  loop.reserve(nfree);
  int start = nbr.begin()->first;
  int prev = -1, cur = start;
  do {
    loop.push_back(cur);
    auto it = nbr.find(cur);
    if (it == nbr.end() || it->second[1] == -1)
      throw std::runtime_error("FREE boundary polyline is not closed");
    int next = it->second[0] == prev ? it->second[1] : it->second[0];
    prev = cur;
    cur = next;
  } while (cur != start && static_cast<int>(loop.size()) <= nfree);
  if (static_cast<int>(loop.size()) != nfree)
    throw std::runtime_error("FREE boundary has more than one loop");
  // orient counter-clockwise for deterministic exports
  double area2 = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec2& a = vertices[loop[i]];
    const Vec2& b = vertices[loop[(i + 1) % loop.size()]];
    area2 += cross(a, b);
  }
  if (area2 < 0.0) std::reverse(loop.begin() + 1, loop.end());
  return loop;
}

Polyline Mesh::free_polyline() const {
  Polyline p;
  for (int v : free_loop()) p.push_back(vertices[v]);
  return p;
}

void Mesh::validate() const {
  if (vertices.empty() || triangles.empty()) throw std::runtime_error("empty mesh");
  const int nv = num_vertices();
  for (const auto& tr : triangles)
    for (int v : tr)
      if (v < 0 || v >= nv) throw std::runtime_error("triangle vertex index out of range");
  for (int t = 0; t < num_triangles(); ++t)
    if (!(triangle_area(t) > 0.0)) throw std::runtime_error("non-positive triangle area");

  std::map<std::pair<int, int>, int> edge_count;
  auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  for (const auto& tr : triangles)
    for (int k = 0; k < 3; ++k) edge_count[key(tr[k], tr[(k + 1) % 3])]++;
  for (const auto& [e, c] : edge_count)
    if (c > 2) throw std::runtime_error("non-conforming mesh: edge shared by >2 triangles");

  std::map<std::pair<int, int>, int> bnd_tagged;
  for (const auto& e : boundary_edges) {
    if (e.a < 0 || e.a >= nv || e.b < 0 || e.b >= nv)
      throw std::runtime_error("boundary edge index out of range");
    if (++bnd_tagged[key(e.a, e.b)] > 1)
      throw std::runtime_error("boundary edge tagged twice");
  }
  for (const auto& [e, c] : edge_count) {
    if (c == 1 && !bnd_tagged.count(e))
      throw std::runtime_error("untagged boundary edge");
    if (c == 2 && bnd_tagged.count(e))
      throw std::runtime_error("interior edge carries a boundary tag");
  }
  auto n_once = std::count_if(edge_count.begin(), edge_count.end(),
                              [](const auto& kv) { return kv.second == 1; });
  if (static_cast<long>(bnd_tagged.size()) != n_once)
    throw std::runtime_error("boundary edge list does not match mesh boundary");

  if (has_tag(Tag::FREE)) {
    Polyline p = free_polyline();  // throws if not one closed loop
    if (!polyline_is_simple(p)) throw std::runtime_error("FREE polyline self-intersects");
  }
}

// ---------------------------------------------------------------------------
// Delaunay triangulation (Bowyer-Watson with walk location)
// ---------------------------------------------------------------------------

namespace {

struct DTri {
  std::array<int, 3> v;  // CCW
  std::array<int, 3> n;  // neighbor opposite v[i], -1 if none
  bool alive = true;
};

class Delaunay {
 public:
  Delaunay(std::vector<Vec2> pts, double bbox_scale) : pts_(std::move(pts)) {
    scale_ = bbox_scale;
    eps_orient_ = 1e-13 * scale_ * scale_;
    const int n = static_cast<int>(pts_.size());
    Vec2 c{0, 0};
    for (const Vec2& p : pts_) c += p;
    c = c / std::max(1, n);
    pts_.push_back(c + Vec2{-39.7, -23.1} * scale_);
    pts_.push_back(c + Vec2{41.3, -21.7} * scale_);
    pts_.push_back(c + Vec2{0.9, 47.9} * scale_);
    super_ = n;
    tris_.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});
    hint_ = 0;
  }

  // Insert point i (index into the original point array). Returns false if the
  // insertion was rejected (only allowed when skippable).
  bool insert(int i, bool skippable) {
    const Vec2 p = pts_[i];
    int loc = locate(p);
    if (loc < 0) {
      if (skippable) return false;
      throw std::runtime_error("Delaunay: point location failed");
    }
    // grow cavity over triangles whose circumcircle contains p
    std::vector<int> cavity;
    std::vector<int> stack{loc};
    ++epoch_;
    mark(loc);
    while (!stack.empty()) {
      int t = stack.back();
      stack.pop_back();
      cavity.push_back(t);
      for (int k = 0; k < 3; ++k) {
        int nb = tris_[t].n[k];
        if (nb < 0 || marked(nb)) continue;
        if (in_circumcircle(nb, p)) {
          mark(nb);
          stack.push_back(nb);
        }
      }
    }
    // collect boundary edges (a, b, outside), CCW as seen from the cavity
    struct BEdge {
      int a, b, outside;
    };
    std::vector<BEdge> bnd;
    for (int t : cavity) {
      for (int k = 0; k < 3; ++k) {
        int nb = tris_[t].n[k];
        if (nb >= 0 && marked(nb)) continue;
        bnd.push_back({tris_[t].v[(k + 1) % 3], tris_[t].v[(k + 2) % 3], nb});
      }
    }
    // every new triangle must be non-degenerate
    for (const BEdge& e : bnd) {
      if (orient(pts_[e.a], pts_[e.b], p) <= eps_orient_) {
        if (skippable) return false;
        throw std::runtime_error("Delaunay: degenerate cavity for mandatory point");
      }
    }
    // commit
    for (int t : cavity) tris_[t].alive = false;
    std::vector<int> fresh(bnd.size());
    for (std::size_t k = 0; k < bnd.size(); ++k) {
      fresh[k] = static_cast<int>(tris_.size());
      tris_.push_back({{bnd[k].a, bnd[k].b, i}, {-1, -1, -1}, true});
      marks_.push_back(0);
    }
    // neighbor wiring: across (a,b) the old outside; new-new via the cycle
    for (std::size_t k = 0; k < bnd.size(); ++k) {
      DTri& t = tris_[fresh[k]];
      t.n[2] = bnd[k].outside;
      if (bnd[k].outside >= 0) {
        DTri& o = tris_[bnd[k].outside];
        for (int j = 0; j < 3; ++j) {
          int oa = o.v[(j + 1) % 3], ob = o.v[(j + 2) % 3];
          if ((oa == bnd[k].a && ob == bnd[k].b) || (oa == bnd[k].b && ob == bnd[k].a))
            o.n[j] = fresh[k];
        }
      }
      for (std::size_t m = 0; m < bnd.size(); ++m) {
        if (bnd[m].a == bnd[k].b) t.n[0] = fresh[m];  // across (b, p)
        if (bnd[m].b == bnd[k].a) t.n[1] = fresh[m];  // across (p, a)
      }
    }
    hint_ = fresh[0];
    return true;
  }

  // triangles not touching the super-triangle, as CCW index triples
  std::vector<std::array<int, 3>> result() const {
    std::vector<std::array<int, 3>> out;
    for (const DTri& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= super_ || t.v[1] >= super_ || t.v[2] >= super_) continue;
      out.push_back(t.v);
    }
    return out;
  }

 private:
  static double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return cross(b - a, c - a);
  }

  bool in_circumcircle(int t, const Vec2& p) const {
    const Vec2& a = pts_[tris_[t].v[0]];
    const Vec2& b = pts_[tris_[t].v[1]];
    const Vec2& c = pts_[tris_[t].v[2]];
    double adx = a.x - p.x, ady = a.y - p.y;
    double bdx = b.x - p.x, bdy = b.y - p.y;
    double cdx = c.x - p.x, cdy = c.y - p.y;
    double ad = adx * adx + ady * ady;
    double bd = bdx * bdx + bdy * bdy;
    double cd = cdx * cdx + cdy * cdy;
    double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                 ad * (bdx * cdy - bdy * cdx);
    double m = std::max({std::abs(adx), std::abs(ady), std::abs(bdx), std::abs(bdy),
                         std::abs(cdx), std::abs(cdy)});
    return det > 1e-12 * m * m * m * m;
  }

  int locate(const Vec2& p) const {
    int cur = hint_;
    if (!tris_[cur].alive)
      for (int t = static_cast<int>(tris_.size()) - 1; t >= 0; --t)
        if (tris_[t].alive) {
          cur = t;
          break;
        }
    const int max_steps = static_cast<int>(tris_.size()) * 4 + 64;
    for (int step = 0; step < max_steps; ++step) {
      const DTri& t = tris_[cur];
      int next = -2;  // -2 = containing triangle found
      for (int k = 0; k < 3; ++k) {
        const Vec2& a = pts_[t.v[(k + 1) % 3]];
        const Vec2& b = pts_[t.v[(k + 2) % 3]];
        if (orient(a, b, p) < -eps_orient_) {
          next = t.n[k];
          break;
        }
      }
      if (next == -2) return cur;
      if (next < 0) break;
      cur = next;
    }
    // fallback: linear scan
    for (int t = static_cast<int>(tris_.size()) - 1; t >= 0; --t) {
      if (!tris_[t].alive) continue;
      bool inside = true;
      for (int k = 0; k < 3; ++k) {
        const Vec2& a = pts_[tris_[t].v[(k + 1) % 3]];
        const Vec2& b = pts_[tris_[t].v[(k + 2) % 3]];
        if (orient(a, b, p) < -eps_orient_) {
          inside = false;
          break;
        }
      }
      if (inside) return t;
    }
    return -1;
  }

  void mark(int t) {
    if (static_cast<int>(marks_.size()) < static_cast<int>(tris_.size()))
      marks_.resize(tris_.size(), 0);
    marks_[t] = epoch_;
  }
  bool marked(int t) const {
    return t < static_cast<int>(marks_.size()) && marks_[t] == epoch_;
  }

  std::vector<Vec2> pts_;
  std::vector<DTri> tris_;
  std::vector<std::uint32_t> marks_;
  std::uint32_t epoch_ = 0;
  int super_ = 0;
  int hint_ = 0;
  double scale_ = 1.0;
  double eps_orient_ = 1e-13;
};

// ---------------------------------------------------------------------------
// Unstructured generator (distmesh-flavoured: sized seeds + Delaunay + smooth)
// ---------------------------------------------------------------------------

struct GenPoint {
  Vec2 p;
  bool fixed = false;  // boundary sample, never moved or skipped
};

struct HoleInfo {
  Polyline poly;  // CCW
  std::map<std::pair<double, double>, int> vertex_id;

  void index_vertices() {
    for (std::size_t i = 0; i < poly.size(); ++i)
      vertex_id[{poly[i].x, poly[i].y}] = static_cast<int>(i);
  }
  int id_of(const Vec2& p) const {
    auto it = vertex_id.find({p.x, p.y});
    return it == vertex_id.end() ? -1 : it->second;
  }
  // distance to the nearest polyline segment and that segment's length
  void nearest(const Vec2& q, double& d, double& seglen) const {
    d = std::numeric_limits<double>::max();
    seglen = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& a = poly[i];
      const Vec2& b = poly[(i + 1) % n];
      double di = point_segment_distance(q, a, b);
      if (di < d) {
        d = di;
        seglen = dist(a, b);
      }
    }
  }
  bool inside(const Vec2& q) const {
    bool in = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      if ((poly[i].y > q.y) != (poly[j].y > q.y) &&
          q.x < (poly[j].x - poly[i].x) * (q.y - poly[i].y) / (poly[j].y - poly[i].y) + poly[i].x)
        in = !in;
    }
    return in;
  }
};

// signed distance of the fluid domain (rect minus hole); negative inside
double domain_sdf(const Rect& r, const HoleInfo* hole, const Vec2& p) {
  double d = std::max(std::max(r.x0 - p.x, p.x - r.x1), std::max(r.y0 - p.y, p.y - r.y1));
  if (hole) {
    double dh, sl;
    hole->nearest(p, dh, sl);
    d = std::max(d, hole->inside(p) ? dh : -dh);
  }
  return d;
}

std::vector<Vec2> sample_segment(const Vec2& a, const Vec2& b, const SizeField& size) {
  double len = dist(a, b);
  Vec2 dir = (b - a) / len;
  std::vector<double> steps;
  double pos = 0.0;
  while (pos < len) {
    double s = size(a + dir * std::min(pos + 1e-12, len));
    steps.push_back(s);
    pos += s;
  }
  if (steps.size() < 2) steps.resize(2, len / 2.0);
  double total = 0.0;
  for (double s : steps) total += s;
  std::vector<Vec2> pts;  // interior points only, endpoints excluded
  double cum = 0.0;
  for (std::size_t k = 0; k + 1 < steps.size(); ++k) {
    cum += steps[k] * (len / total);
    pts.push_back(a + dir * cum);
  }
  return pts;
}

Tag classify_edge(const Rect& r, const HoleInfo* hole, const Vec2& a, const Vec2& b) {
  const double tol = 1e-9 * std::max(r.width(), r.height());
  if (std::abs(a.x - r.x0) < tol && std::abs(b.x - r.x0) < tol) return Tag::IN;
  if (std::abs(a.x - r.x1) < tol && std::abs(b.x - r.x1) < tol) return Tag::OUT;
  if ((std::abs(a.y - r.y0) < tol && std::abs(b.y - r.y0) < tol) ||
      (std::abs(a.y - r.y1) < tol && std::abs(b.y - r.y1) < tol))
    return Tag::WALL;
  if (hole) {
    int ia = hole->id_of(a), ib = hole->id_of(b);
    int n = static_cast<int>(hole->poly.size());
    if (ia >= 0 && ib >= 0 && (std::abs(ia - ib) == 1 || std::abs(ia - ib) == n - 1))
      return Tag::FREE;
    throw std::runtime_error("hole boundary not recovered by the triangulation (edge " +
                             std::to_string(ia) + "," + std::to_string(ib) + " at " +
                             std::to_string(a.x) + "," + std::to_string(a.y) + " - " +
                             std::to_string(b.x) + "," + std::to_string(b.y) + ")");
  }
  throw std::runtime_error("boundary edge on no known feature");
}

Mesh triangulate_and_prune(const std::vector<GenPoint>& points, const Rect& rect,
                           const HoleInfo* hole, std::vector<int>& point_to_vertex) {
  std::vector<Vec2> coords(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) coords[i] = points[i].p;
  double scale = std::max(rect.width(), rect.height());
  Delaunay del(coords, scale);
  for (std::size_t i = 0; i < points.size(); ++i)
    del.insert(static_cast<int>(i), !points[i].fixed);

  std::vector<std::array<int, 3>> tris = del.result();
  std::vector<std::array<int, 3>> kept;
  for (const auto& t : tris) {
    Vec2 c = (coords[t[0]] + coords[t[1]] + coords[t[2]]) / 3.0;
    if (domain_sdf(rect, hole, c) < 0.0) kept.push_back(t);
  }

  // compact vertex numbering
  std::vector<int>& remap = point_to_vertex;
  remap.assign(points.size(), -1);
  Mesh mesh;
  for (auto& t : kept) {
    for (int& v : t) {
      if (remap[v] == -1) {
        remap[v] = mesh.num_vertices();
        mesh.vertices.push_back(coords[v]);
      }
      v = remap[v];
    }
    mesh.triangles.push_back(t);
  }

  // boundary edges = used exactly once
  std::map<std::pair<int, int>, int> count;
  auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) count[key(t[k], t[(k + 1) % 3])]++;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (count[key(a, b)] == 1) {
        mesh.boundary_edges.push_back(
            {a, b, classify_edge(rect, hole, mesh.vertices[a], mesh.vertices[b])});
      }
    }
  }
  return mesh;
}

Mesh generate_unstructured(const Rect& rect, const Polyline& hole_poly, const SizeField& size,
                           double h_base, std::uint64_t seed) {
  // Exactly co-circular hole samples break the incircle predicate, so the
  // triangulation runs on points pulled inward by ~1e-6 h; the mesh vertices
  // are snapped back to the exact outline afterwards.
  Polyline hole_jittered = hole_poly;
  if (!hole_poly.empty()) {
    Vec2 centroid{0, 0};
    for (const Vec2& p : hole_poly) centroid += p;
    centroid = centroid / static_cast<double>(hole_poly.size());
    for (std::size_t i = 0; i < hole_poly.size(); ++i) {
      double amp = (0.5 + hash01(seed ^ 0x5eedull, i, 17)) * 1e-6 * h_base;
      hole_jittered[i] += amp * normalized(centroid - hole_poly[i]);
    }
  }

  HoleInfo hole_info;
  const HoleInfo* hole = nullptr;
  if (!hole_jittered.empty()) {
    hole_info.poly = hole_jittered;
    hole_info.index_vertices();
    hole = &hole_info;
  }

  std::vector<GenPoint> pts;
  auto add_fixed = [&](const Vec2& p) { pts.push_back({p, true}); };

  // rectangle outline
  const Vec2 c00{rect.x0, rect.y0}, c10{rect.x1, rect.y0};
  const Vec2 c11{rect.x1, rect.y1}, c01{rect.x0, rect.y1};
  add_fixed(c00);
  add_fixed(c10);
  add_fixed(c11);
  add_fixed(c01);
  for (const Vec2* s : {&c00, &c10, &c11, &c01}) {
    const Vec2* e = s == &c00 ? &c10 : s == &c10 ? &c11 : s == &c11 ? &c01 : &c00;
    for (const Vec2& p : sample_segment(*s, *e, size)) add_fixed(p);
  }
  const std::size_t hole_start = pts.size();
  for (const Vec2& p : hole_jittered) add_fixed(p);
  const std::size_t n_fixed = pts.size();

  // interior seeds: thinned hex lattice at base spacing
  const double dy = h_base * std::sqrt(3.0) / 2.0;
  int row = 0;
  for (double y = rect.y0 + dy; y < rect.y1 - 0.4 * dy; y += dy, ++row) {
    double x0 = rect.x0 + (row % 2 ? 0.75 : 0.25) * h_base;
    int col = 0;
    for (double x = x0; x < rect.x1 - 0.2 * h_base; x += h_base, ++col) {
      Vec2 p{x, y};
      double s = size(p);
      double keep = (h_base / s) * (h_base / s);
      if (hash01(seed, row, col) >= keep) continue;
      // clearance from all boundaries so that boundary chords stay Delaunay
      if (domain_sdf(rect, hole, p) > -0.7 * s) continue;
      if (hole) {
        double dh, seglen;
        hole->nearest(p, dh, seglen);
        if (dh < 0.6 * seglen) continue;
      }
      double jx = (hash01(seed ^ 0x51ed, row, col) - 0.5) * 0.02 * h_base;
      double jy = (hash01(seed ^ 0xa3c9, row, col) - 0.5) * 0.02 * h_base;
      pts.push_back({{p.x + jx, p.y + jy}, false});
    }
  }

  // Delaunay + Laplacian smoothing rounds
  Mesh mesh;
  std::vector<int> pt2vert;
  const int rounds = 3;
  for (int r = 0; r <= rounds; ++r) {
    mesh = triangulate_and_prune(pts, rect, hole, pt2vert);
    if (r == rounds) break;
    std::vector<int> vert2pt(mesh.num_vertices(), -1);
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (pt2vert[i] >= 0) vert2pt[pt2vert[i]] = static_cast<int>(i);
    std::vector<Vec2> sum(pts.size(), Vec2{0, 0});
    std::vector<int> cnt(pts.size(), 0);
    for (const auto& t : mesh.triangles) {
      for (int k = 0; k < 3; ++k) {
        int a = vert2pt[t[k]], b = vert2pt[t[(k + 1) % 3]];
        if (a < 0 || b < 0) continue;
        sum[a] += pts[b].p;
        cnt[a]++;
        sum[b] += pts[a].p;
        cnt[b]++;
      }
    }
    for (std::size_t i = n_fixed; i < pts.size(); ++i) {
      if (cnt[i] == 0) continue;
      Vec2 cand = sum[i] / cnt[i];
      double s = size(cand);
      if (domain_sdf(rect, hole, cand) > -0.55 * s) continue;
      if (hole) {
        double dh, seglen;
        hole->nearest(cand, dh, seglen);
        if (dh < 0.55 * seglen) continue;
      }
      pts[i].p = cand;
    }
  }
  // snap the hole vertices back to the exact outline
  for (std::size_t i = 0; i < hole_poly.size(); ++i) {
    int v = pt2vert[hole_start + i];
    if (v < 0) throw std::runtime_error("hole outline vertex lost during triangulation");
    mesh.vertices[v] = hole_poly[i];
  }
  mesh.validate();
  return mesh;
}

}  // namespace

Mesh build_channel_mesh(const ChannelGeometry& geom, double h_min, double h_max,
                        std::uint64_t seed) {
  geom.validate();
  if (!(h_min > 0.0) || !(h_min <= h_max))
    throw std::invalid_argument("mesh sizes must satisfy 0 < h_min <= h_max");
  Rect rect = geom.rect();

  int nseg = geom.obstacle_segments;
  if (nseg == 0)
    nseg = std::max(16, static_cast<int>(std::lround(
                            2.0 * std::numbers::pi * geom.obstacle_radius / h_min)));
  Polyline circle(nseg);
  for (int k = 0; k < nseg; ++k) {
    double phi = 2.0 * std::numbers::pi * k / nseg;
    circle[k] = geom.obstacle_center +
                Vec2{geom.obstacle_radius * std::cos(phi), geom.obstacle_radius * std::sin(phi)};
  }

  const Vec2 c = geom.obstacle_center;
  const double r = geom.obstacle_radius;
  SizeField size = [=](const Vec2& p) {
    double d = std::max(0.0, dist(p, c) - r);
    return std::clamp(h_min + 0.35 * d, h_min, h_max);
  };
  return generate_unstructured(rect, circle, size, h_min, seed);
}

Mesh build_rectangle_mesh(const Rect& rect, double h_min, double h_max, std::uint64_t seed) {
  if (!(h_min > 0.0) || !(h_min <= h_max))
    throw std::invalid_argument("mesh sizes must satisfy 0 < h_min <= h_max");
  SizeField size = [=](const Vec2&) { return h_min; };
  return generate_unstructured(rect, {}, size, h_min, seed);
}

Mesh build_mesh_with_hole(const Rect& rect, const Polyline& hole, double h_min, double h_max,
                          std::uint64_t seed) {
  if (!(h_min > 0.0) || !(h_min <= h_max))
    throw std::invalid_argument("mesh sizes must satisfy 0 < h_min <= h_max");
  if (hole.size() < 3 || !polyline_is_simple(hole))
    throw std::invalid_argument("hole must be a simple closed polyline");
  Polyline hole_copy = hole;
  SizeField size = [=](const Vec2& p) {
    double d = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < hole_copy.size(); ++i)
      d = std::min(d, point_segment_distance(p, hole_copy[i],
                                             hole_copy[(i + 1) % hole_copy.size()]));
    return std::clamp(h_min + 0.35 * d, h_min, h_max);
  };
  return generate_unstructured(rect, hole, size, h_min, seed);
}

Mesh build_structured_rectangle(const Rect& rect, int nx, int ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("need at least one cell per direction");
  Mesh mesh;
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.push_back({rect.x0 + rect.width() * i / nx, rect.y0 + rect.height() * j / ny});
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int a = vid(i, j), b = vid(i + 1, j), d = vid(i, j + 1), e = vid(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        mesh.triangles.push_back({a, b, e});
        mesh.triangles.push_back({a, e, d});
      } else {
        mesh.triangles.push_back({a, b, d});
        mesh.triangles.push_back({b, e, d});
      }
    }
  }
  for (int j = 0; j < ny; ++j) {
    mesh.boundary_edges.push_back({vid(0, j + 1), vid(0, j), Tag::IN});
    mesh.boundary_edges.push_back({vid(nx, j), vid(nx, j + 1), Tag::OUT});
  }
  for (int i = 0; i < nx; ++i) {
    mesh.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), Tag::WALL});
    mesh.boundary_edges.push_back({vid(i + 1, ny), vid(i, ny), Tag::WALL});
  }
  mesh.validate();
  return mesh;
}

Mesh apply_deformation(const Mesh& mesh, const Field& theta, double t) {
  if (theta.kind != Field::Kind::VectorQuadratic)
    throw std::invalid_argument("apply_deformation: theta must be a vector-quadratic field");
  const DofMap& dm = *theta.dofmap;
  if (&dm.mesh() != &mesh && dm.mesh().num_vertices() != mesh.num_vertices())
    throw std::invalid_argument("apply_deformation: theta not defined on this mesh");
  const double tol = 1e-12;
  for (Tag tag : {Tag::IN, Tag::WALL, Tag::OUT}) {
    for (int n : dm.boundary_nodes(tag)) {
      Vec2 v = theta.node_value(n);
      if (std::abs(v.x) > tol || std::abs(v.y) > tol)
        throw std::invalid_argument("apply_deformation: theta does not vanish on " +
                                    std::string(tag_name(tag)) + " boundary");
    }
  }
  Mesh out = mesh;
  for (int v = 0; v < mesh.num_vertices(); ++v) out.vertices[v] = mesh.vertices[v] + t * theta.node_value(v);
  return out;
}

QualityReport mesh_quality(const Mesh& mesh, double angle_thresh_deg, double area_thresh) {
  QualityReport rep;
  rep.min_angle_deg = 180.0;
  rep.min_area = std::numeric_limits<double>::max();
  rep.worst_aspect_ratio = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tr = mesh.triangles[t];
    const Vec2& a = mesh.vertices[tr[0]];
    const Vec2& b = mesh.vertices[tr[1]];
    const Vec2& c = mesh.vertices[tr[2]];
    double area = mesh.triangle_area(t);
    rep.min_area = std::min(rep.min_area, area);
    double la = dist(b, c), lb = dist(c, a), lc = dist(a, b);
    double lmax = std::max({la, lb, lc});
    double perim = la + lb + lc;
    double inradius = area > 0.0 ? 2.0 * area / perim : 0.0;
    rep.worst_aspect_ratio =
        std::max(rep.worst_aspect_ratio,
                 inradius > 0.0 ? lmax / (2.0 * inradius) : std::numeric_limits<double>::max());
    // angles via the cross/dot form, stable for slivers
    const Vec2 pts[3] = {a, b, c};
    for (int k = 0; k < 3; ++k) {
      Vec2 u = pts[(k + 1) % 3] - pts[k];
      Vec2 v = pts[(k + 2) % 3] - pts[k];
      double ang = std::atan2(std::abs(cross(u, v)), dot(u, v)) * 180.0 / std::numbers::pi;
      rep.min_angle_deg = std::min(rep.min_angle_deg, ang);
    }
  }
  rep.degenerate = rep.min_angle_deg < angle_thresh_deg || rep.min_area < area_thresh;
  return rep;
}

namespace {

// nearest-vertex lookup over the old mesh for the adaptation size field
class VertexLocator {
 public:
  VertexLocator(const Mesh& mesh, double cell) : mesh_(mesh), cell_(cell) {
    for (const Vec2& v : mesh.vertices) {
      min_.x = std::min(min_.x, v.x);
      min_.y = std::min(min_.y, v.y);
    }
    for (int i = 0; i < mesh.num_vertices(); ++i)
      grid_[key(mesh.vertices[i])].push_back(i);
  }
  int nearest(const Vec2& p) const {
    auto [ci, cj] = cell_of(p);
    int best = -1;
    double bestd = std::numeric_limits<double>::max();
    for (int ring = 0; ring < 64; ++ring) {
      for (int i = ci - ring; i <= ci + ring; ++i) {
        for (int j = cj - ring; j <= cj + ring; ++j) {
          if (std::max(std::abs(i - ci), std::abs(j - cj)) != ring) continue;
          auto it = grid_.find((static_cast<std::int64_t>(i) << 24) ^ j);
          if (it == grid_.end()) continue;
          for (int v : it->second) {
            double d = dist(mesh_.vertices[v], p);
            if (d < bestd) {
              bestd = d;
              best = v;
            }
          }
        }
      }
      if (best >= 0 && bestd < cell_ * (ring - 0.5)) break;
    }
    return best;
  }

 private:
  std::pair<int, int> cell_of(const Vec2& p) const {
    return {static_cast<int>(std::floor((p.x - min_.x) / cell_)),
            static_cast<int>(std::floor((p.y - min_.y) / cell_))};
  }
  std::int64_t key(const Vec2& p) const {
    auto [i, j] = cell_of(p);
    return (static_cast<std::int64_t>(i) << 24) ^ j;
  }
  const Mesh& mesh_;
  double cell_;
  Vec2 min_{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  std::map<std::int64_t, std::vector<int>> grid_;
};

}  // namespace

Mesh adapt_mesh(const Mesh& mesh, const Field& u, double h_min, double h_max,
                std::uint64_t seed) {
  if (!(h_min > 0.0) || !(h_min <= h_max))
    throw std::invalid_argument("mesh sizes must satisfy 0 < h_min <= h_max");
  // speed magnitude per vertex of the old mesh
  std::vector<double> speed(mesh.num_vertices(), 0.0);
  double umax = 0.0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    speed[v] = norm(u.node_value(v));
    umax = std::max(umax, speed[v]);
  }
  Rect rect;
  rect.x0 = rect.y0 = std::numeric_limits<double>::max();
  rect.x1 = rect.y1 = std::numeric_limits<double>::lowest();
  for (const Vec2& v : mesh.vertices) {
    rect.x0 = std::min(rect.x0, v.x);
    rect.y0 = std::min(rect.y0, v.y);
    rect.x1 = std::max(rect.x1, v.x);
    rect.y1 = std::max(rect.y1, v.y);
  }
  Polyline hole = mesh.has_tag(Tag::FREE) ? mesh.free_polyline() : Polyline{};

  SizeField size;
  if (umax <= 0.0 || h_min == h_max) {
    size = [=](const Vec2&) { return h_min; };
  } else {
    auto locator = std::make_shared<VertexLocator>(mesh, 2.0 * h_max);
    auto speeds = std::make_shared<std::vector<double>>(std::move(speed));
    size = [=](const Vec2& p) {
      int v = locator->nearest(p);
      double s = v >= 0 ? (*speeds)[v] : 0.0;
      return std::clamp(h_max / (1.0 + s / umax), h_min, h_max);
    };
  }
  return generate_unstructured(rect, hole, size, h_min, seed);
}

// ---------------------------------------------------------------------------
// I/O
// ---------------------------------------------------------------------------

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os.precision(17);
  os << "vertices " << mesh.num_vertices() << " / triangles " << mesh.num_triangles()
     << " / boundary " << mesh.boundary_edges.size() << "\n";
  for (const Vec2& v : mesh.vertices) os << v.x << " " << v.y << "\n";
  for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
  for (const auto& e : mesh.boundary_edges)
    os << e.a << " " << e.b << " " << tag_name(e.tag) << "\n";
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_mesh(os, mesh);
}

Mesh read_mesh(std::istream& is) {
  std::string kw, slash;
  int nv = 0, nt = 0, nb = 0;
  is >> kw >> nv;
  if (kw != "vertices") throw std::runtime_error("mesh format: expected 'vertices N'");
  is >> slash >> kw >> nt;
  if (slash != "/" || kw != "triangles")
    throw std::runtime_error("mesh format: expected '/ triangles M'");
  is >> slash >> kw >> nb;
  if (slash != "/" || kw != "boundary")
    throw std::runtime_error("mesh format: expected '/ boundary K'");
  Mesh mesh;
  mesh.vertices.resize(nv);
  for (auto& v : mesh.vertices) is >> v.x >> v.y;
  mesh.triangles.resize(nt);
  for (auto& t : mesh.triangles) is >> t[0] >> t[1] >> t[2];
  mesh.boundary_edges.resize(nb);
  for (auto& e : mesh.boundary_edges) {
    std::string tag;
    is >> e.a >> e.b >> tag;
    e.tag = tag_from_name(tag);
  }
  if (!is) throw std::runtime_error("mesh format: truncated file");
  mesh.validate();
  return mesh;
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_mesh(is);
}

Mesh read_gmsh_v2(std::istream& is, const std::map<int, Tag>& physical_to_tag) {
  std::string line;
  Mesh mesh;
  std::map<int, int> node_remap;  // gmsh 1-based ids -> our indices
  while (std::getline(is, line)) {
    if (line.rfind("$MeshFormat", 0) == 0) {
      std::getline(is, line);
      std::istringstream hdr(line);
      double version = 0;
      hdr >> version;
      if (version < 2.0 || version >= 3.0)
        throw std::runtime_error("gmsh import supports only v2 ASCII files");
    } else if (line.rfind("$Nodes", 0) == 0) {
      int n = 0;
      is >> n;
      for (int i = 0; i < n; ++i) {
        int id;
        double x, y, z;
        is >> id >> x >> y >> z;
        node_remap[id] = mesh.num_vertices();
        mesh.vertices.push_back({x, y});
      }
    } else if (line.rfind("$Elements", 0) == 0) {
      int n = 0;
      is >> n;
      for (int i = 0; i < n; ++i) {
        int id, type, ntags;
        is >> id >> type >> ntags;
        std::vector<int> tags(ntags);
        for (int& t : tags) is >> t;
        if (type == 1) {  // 2-node line
          int a, b;
          is >> a >> b;
          if (ntags < 1) throw std::runtime_error("gmsh line element without physical tag");
          auto it = physical_to_tag.find(tags[0]);
          if (it == physical_to_tag.end())
            throw std::runtime_error("gmsh physical group " + std::to_string(tags[0]) +
                                     " has no boundary-tag mapping");
          mesh.boundary_edges.push_back({node_remap.at(a), node_remap.at(b), it->second});
        } else if (type == 2) {  // 3-node triangle
          int a, b, c;
          is >> a >> b >> c;
          std::array<int, 3> t{node_remap.at(a), node_remap.at(b), node_remap.at(c)};
          mesh.triangles.push_back(t);
        } else if (type == 15) {  // point
          int a;
          is >> a;
        } else {
          throw std::runtime_error("gmsh import: unsupported element type " +
                                   std::to_string(type));
        }
      }
    }
  }
  // drop unreferenced nodes and fix orientation
  std::vector<int> used(mesh.num_vertices(), -1);
  Mesh out;
  for (auto t : mesh.triangles) {
    const Vec2& a = mesh.vertices[t[0]];
    const Vec2& b = mesh.vertices[t[1]];
    const Vec2& c = mesh.vertices[t[2]];
    if (cross(b - a, c - a) < 0.0) std::swap(t[1], t[2]);
    for (int& v : t) {
      if (used[v] == -1) {
        used[v] = out.num_vertices();
        out.vertices.push_back(mesh.vertices[v]);
      }
      v = used[v];
    }
    out.triangles.push_back(t);
  }
  for (auto e : mesh.boundary_edges) {
    if (used[e.a] == -1 || used[e.b] == -1)
      throw std::runtime_error("gmsh boundary edge references unused node");
    e.a = used[e.a];
    e.b = used[e.b];
    out.boundary_edges.push_back(e);
  }
  out.validate();
  return out;
}

}  // namespace vortexshape
