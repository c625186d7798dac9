#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "vortexshape/geometry.hpp"

namespace vortexshape {

struct Field;  // defined in dofmap.hpp

enum class Tag : std::uint8_t { IN = 0, WALL = 1, OUT = 2, FREE = 3 };

const char* tag_name(Tag t);
Tag tag_from_name(const std::string& name);

struct BoundaryEdge {
  int a = -1;
  int b = -1;
  Tag tag = Tag::WALL;
};

struct QualityReport {
  double min_angle_deg = 0.0;
  double min_area = 0.0;
  double worst_aspect_ratio = 0.0;
  bool degenerate = false;
};

// Conforming triangle mesh with tagged boundary. Immutable after construction:
// all operations below are pure functions returning new meshes.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // CCW
  std::vector<BoundaryEdge> boundary_edges;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  double triangle_area(int t) const;
  double total_area() const;
  double free_perimeter() const;

  // Ordered vertex loop of the FREE boundary (closed, first vertex not repeated).
  std::vector<int> free_loop() const;
  Polyline free_polyline() const;
  bool has_tag(Tag t) const;

  // Checks conformity, orientation, tag partition and FREE-loop topology.
  // Throws std::runtime_error with a description on the first violation.
  void validate() const;
};

// Size field used by the generators: target edge length at a point.
using SizeField = std::function<double(const Vec2&)>;

// Unstructured mesh of the channel with the circular obstacle removed.
// Interior sizing is graded from h_min at the obstacle towards h_max.
Mesh build_channel_mesh(const ChannelGeometry& geom, double h_min, double h_max,
                        std::uint64_t seed = 1);

// Unstructured rectangle without obstacle (IN at x=x0, OUT at x=x1, WALL else).
Mesh build_rectangle_mesh(const Rect& rect, double h_min, double h_max,
                          std::uint64_t seed = 1);

// Unstructured rectangle with an arbitrary simple hole polyline; the hole
// vertices are kept exactly and its edges are tagged FREE.
Mesh build_mesh_with_hole(const Rect& rect, const Polyline& hole, double h_min, double h_max,
                          std::uint64_t seed = 1);

// Structured rectangle: nx-by-ny cells, each split into two triangles.
Mesh build_structured_rectangle(const Rect& rect, int nx, int ny);

// x |-> x + t*theta(x) on every vertex; connectivity and tags unchanged.
// theta must vanish (<= 1e-12) on all non-FREE boundary nodes.
Mesh apply_deformation(const Mesh& mesh, const Field& theta, double t);

QualityReport mesh_quality(const Mesh& mesh, double angle_thresh_deg = 5.0,
                           double area_thresh = 1e-10);

// Remesh with local size clamp(h_max / (1 + |u|/max|u|), h_min, h_max).
// The FREE polyline vertices are kept exactly; the interior and the outer
// boundary are regenerated.
Mesh adapt_mesh(const Mesh& mesh, const Field& u, double h_min, double h_max,
                std::uint64_t seed = 1);

// Text format:
//   vertices N / triangles M / boundary K
//   N lines "x y", M lines "i j k", K lines "i j TAG"
void write_mesh(std::ostream& os, const Mesh& mesh);
void write_mesh_file(const std::string& path, const Mesh& mesh);
Mesh read_mesh(std::istream& is);
Mesh read_mesh_file(const std::string& path);

// Gmsh v2 ASCII import; physical group id -> tag for the line elements.
Mesh read_gmsh_v2(std::istream& is, const std::map<int, Tag>& physical_to_tag);

}  // namespace vortexshape
