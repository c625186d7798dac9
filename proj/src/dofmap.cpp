#include "vortexshape/dofmap.hpp"

#include <algorithm>
#include <stdexcept>

namespace vortexshape {

namespace {
std::int64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::int64_t>(a) << 32) | static_cast<std::int64_t>(b);
}
}  // namespace

DofMap::DofMap(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
  const Mesh& m = *mesh_;
  tri_nodes_.resize(m.num_triangles());

  // enumerate undirected edges in first-seen order
  edge_lookup_.reserve(m.num_triangles() * 2);
  auto find_or_add = [&](int a, int b) {
    std::int64_t k = edge_key(a, b);
    auto [it, inserted] = edge_lookup_.try_emplace(k, static_cast<int>(edges_.size()));
    if (inserted) edges_.push_back({std::min(a, b), std::max(a, b)});
    return it->second;
  };
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tr = m.triangles[t];
    tri_nodes_[t] = {tr[0],
                     tr[1],
                     tr[2],
                     0, 0, 0};
    tri_nodes_[t][3] = m.num_vertices() + find_or_add(tr[0], tr[1]);
    tri_nodes_[t][4] = m.num_vertices() + find_or_add(tr[1], tr[2]);
    tri_nodes_[t][5] = m.num_vertices() + find_or_add(tr[2], tr[0]);
  }

  bnd_midnodes_.resize(m.boundary_edges.size());
  std::array<std::vector<int>, 4> nodes;
  for (std::size_t k = 0; k < m.boundary_edges.size(); ++k) {
    const BoundaryEdge& e = m.boundary_edges[k];
    int eid = edge_index(e.a, e.b);
    if (eid < 0) throw std::runtime_error("boundary edge missing from triangulation");
    bnd_midnodes_[k] = m.num_vertices() + eid;
    auto& lst = nodes[static_cast<int>(e.tag)];
    lst.push_back(e.a);
    lst.push_back(e.b);
    lst.push_back(bnd_midnodes_[k]);
  }
  for (int t = 0; t < 4; ++t) {
    auto& lst = nodes[t];
    std::sort(lst.begin(), lst.end());
    lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
    tag_nodes_[t] = lst;
    for (int n : lst) {
      tag_dofs_[t].push_back(2 * n);
      tag_dofs_[t].push_back(2 * n + 1);
    }
  }
}

Vec2 DofMap::node_position(int n) const {
  if (n < num_vertices()) return mesh_->vertices[n];
  const auto& e = edges_[n - num_vertices()];
  return (mesh_->vertices[e[0]] + mesh_->vertices[e[1]]) * 0.5;
}

int DofMap::edge_index(int a, int b) const {
  auto it = edge_lookup_.find(edge_key(a, b));
  return it == edge_lookup_.end() ? -1 : it->second;
}

const std::vector<int>& DofMap::boundary_velocity_dofs(Tag t) const {
  return tag_dofs_[static_cast<int>(t)];
}

const std::vector<int>& DofMap::boundary_nodes(Tag t) const {
  return tag_nodes_[static_cast<int>(t)];
}

Field::Field(std::shared_ptr<const DofMap> dm, Kind k) : dofmap(std::move(dm)), kind(k) {
  coeffs = Eigen::VectorXd::Zero(kind == Kind::VectorQuadratic ? dofmap->num_velocity_dofs()
                                                               : dofmap->num_pressure_dofs());
}

Field interpolate_vector(std::shared_ptr<const DofMap> dm,
                         const std::function<Vec2(const Vec2&)>& f) {
  Field out(dm, Field::Kind::VectorQuadratic);
  for (int n = 0; n < dm->num_velocity_nodes(); ++n) out.set_node_value(n, f(dm->node_position(n)));
  return out;
}

}  // namespace vortexshape
