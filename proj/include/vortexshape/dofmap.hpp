#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "vortexshape/mesh.hpp"

namespace vortexshape {

// Taylor-Hood numbering over a Mesh: quadratic vector velocity (nodes =
// vertices + edge midpoints), linear scalar pressure (nodes = vertices).
//
// Velocity node n (vertex i -> n = i, edge e -> n = V + e) carries the two
// scalar dofs (2n, 2n+1). Pressure dof of vertex i is i; in the assembled
// saddle system it sits at offset 2*(V+E) + i.
class DofMap {
 public:
  explicit DofMap(std::shared_ptr<const Mesh> mesh);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }

  int num_vertices() const { return mesh_->num_vertices(); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_velocity_nodes() const { return num_vertices() + num_edges(); }
  int num_velocity_dofs() const { return 2 * num_velocity_nodes(); }
  int num_pressure_dofs() const { return num_vertices(); }
  int num_saddle_dofs() const { return num_velocity_dofs() + num_pressure_dofs(); }

  // the 6 velocity nodes of triangle t: 3 vertices then midside nodes of
  // edges (0,1), (1,2), (2,0)
  const std::array<int, 6>& triangle_nodes(int t) const { return tri_nodes_[t]; }
  const std::array<int, 2>& edge_vertices(int e) const { return edges_[e]; }
  Vec2 node_position(int n) const;

  // global edge index of an undirected vertex pair, -1 if absent
  int edge_index(int a, int b) const;
  // velocity node of the midside of boundary edge k
  int boundary_edge_midnode(int k) const { return bnd_midnodes_[k]; }

  // sorted velocity dof indices (both components) of all nodes lying on
  // boundary edges with the given tag
  const std::vector<int>& boundary_velocity_dofs(Tag t) const;
  // sorted velocity node ids on boundary edges with the given tag
  const std::vector<int>& boundary_nodes(Tag t) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<std::array<int, 2>> edges_;           // undirected, a < b
  std::vector<std::array<int, 6>> tri_nodes_;
  std::vector<int> bnd_midnodes_;
  std::array<std::vector<int>, 4> tag_dofs_;
  std::array<std::vector<int>, 4> tag_nodes_;
  std::unordered_map<std::int64_t, int> edge_lookup_;
};

// Coefficient vector of a discrete function tied to a DofMap.
struct Field {
  enum class Kind { VectorQuadratic, ScalarLinear };

  std::shared_ptr<const DofMap> dofmap;
  Kind kind = Kind::VectorQuadratic;
  Eigen::VectorXd coeffs;

  Field() = default;
  Field(std::shared_ptr<const DofMap> dm, Kind k);

  int size() const { return static_cast<int>(coeffs.size()); }
  // vector-quadratic access by velocity node
  Vec2 node_value(int node) const { return {coeffs[2 * node], coeffs[2 * node + 1]}; }
  void set_node_value(int node, const Vec2& v) {
    coeffs[2 * node] = v.x;
    coeffs[2 * node + 1] = v.y;
  }
};

// Interpolate an expression at every velocity node.
Field interpolate_vector(std::shared_ptr<const DofMap> dm,
                         const std::function<Vec2(const Vec2&)>& f);

}  // namespace vortexshape
