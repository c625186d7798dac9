#include "vortexshape/fem.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "vortexshape/quadrature.hpp"

namespace vortexshape {

ElementGeometry::ElementGeometry(const Mesh& mesh, int t) {
  const auto& tr = mesh.triangles[t];
  x = {mesh.vertices[tr[0]], mesh.vertices[tr[1]], mesh.vertices[tr[2]]};
  double a = x[1].x - x[0].x, b = x[2].x - x[0].x;
  double c = x[1].y - x[0].y, d = x[2].y - x[0].y;
  double det = a * d - b * c;
  area = 0.5 * det;
  inv_jac[0][0] = d / det;
  inv_jac[0][1] = -b / det;
  inv_jac[1][0] = -c / det;
  inv_jac[1][1] = a / det;
}

Grad2 field_gradient(const Field& u, const ElementGeometry& geo,
                     const std::array<int, 6>& nodes, double xi, double eta) {
  auto ref = p2_gradients(xi, eta);
  Grad2 g;
  for (int n = 0; n < 6; ++n) {
    Vec2 gn = geo.phys_grad(ref[n]);
    Vec2 val = u.node_value(nodes[n]);
    g.g[0][0] += val.x * gn.x;
    g.g[0][1] += val.x * gn.y;
    g.g[1][0] += val.y * gn.x;
    g.g[1][1] += val.y * gn.y;
  }
  return g;
}

Vec2 field_value(const Field& u, const std::array<int, 6>& nodes, double xi, double eta) {
  auto phi = p2_values(xi, eta);
  Vec2 v{0, 0};
  for (int n = 0; n < 6; ++n) v += phi[n] * u.node_value(nodes[n]);
  return v;
}

SaddleSystem assemble(std::shared_ptr<const DofMap> dofmap, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("viscosity must be positive");
  const DofMap& dm = *dofmap;
  const Mesh& mesh = dm.mesh();
  const int nv = dm.num_velocity_dofs();
  const int np = dm.num_pressure_dofs();

  std::vector<Eigen::Triplet<double>> ta, tb, tm;
  ta.reserve(mesh.num_triangles() * 72);
  tb.reserve(mesh.num_triangles() * 36);
  tm.reserve(mesh.num_triangles() * 72);

  const auto& rule = tri_rule_deg4();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    ElementGeometry geo(mesh, t);
    const auto& nodes = dm.triangle_nodes(t);
    const auto& tri = mesh.triangles[t];
    double k[6][6] = {};
    double mm[6][6] = {};
    double bx[3][6] = {};
    double by[3][6] = {};
    for (const QPoint& q : rule) {
      double w = q.w * geo.area;
      auto phi = p2_values(q.xi, q.eta);
      auto ref = p2_gradients(q.xi, q.eta);
      Vec2 g[6];
      for (int n = 0; n < 6; ++n) g[n] = geo.phys_grad(ref[n]);
      auto psi = p1_values(q.xi, q.eta);
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
          k[i][j] += w * dot(g[i], g[j]);
          mm[i][j] += w * phi[i] * phi[j];
        }
        for (int p = 0; p < 3; ++p) {
          bx[p][i] -= w * psi[p] * g[i].x;
          by[p][i] -= w * psi[p] * g[i].y;
        }
      }
    }
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        for (int c = 0; c < 2; ++c) {
          ta.emplace_back(2 * nodes[i] + c, 2 * nodes[j] + c, nu * k[i][j]);
          tm.emplace_back(2 * nodes[i] + c, 2 * nodes[j] + c, mm[i][j]);
        }
      }
      for (int p = 0; p < 3; ++p) {
        tb.emplace_back(tri[p], 2 * nodes[i], bx[p][i]);
        tb.emplace_back(tri[p], 2 * nodes[i] + 1, by[p][i]);
      }
    }
  }

  SaddleSystem sys;
  sys.dofmap = std::move(dofmap);
  sys.nu = nu;
  sys.A.resize(nv, nv);
  sys.A.setFromTriplets(ta.begin(), ta.end());
  sys.B.resize(np, nv);
  sys.B.setFromTriplets(tb.begin(), tb.end());
  sys.M.resize(nv, nv);
  sys.M.setFromTriplets(tm.begin(), tm.end());
  return sys;
}

SpMat SaddleSystem::full_matrix() const {
  const int nv = dofmap->num_velocity_dofs();
  const int np = dofmap->num_pressure_dofs();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(A.nonZeros() + 2 * B.nonZeros());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      trip.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < B.outerSize(); ++k) {
    for (SpMat::InnerIterator it(B, k); it; ++it) {
      trip.emplace_back(nv + it.row(), it.col(), it.value());
      trip.emplace_back(it.col(), nv + it.row(), it.value());
    }
  }
  SpMat K(nv + np, nv + np);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

bool SaddleSystem::is_constrained(int dof) const {
  auto it = std::lower_bound(
      constrained_dofs.begin(), constrained_dofs.end(), dof,
      [](const std::pair<int, double>& a, int d) { return a.first < d; });
  return it != constrained_dofs.end() && it->first == dof;
}

SaddleSystem apply_dirichlet(const SaddleSystem& system,
                             const std::map<Tag, BoundaryFunction>& tag_values) {
  if (tag_values.count(Tag::OUT))
    throw std::invalid_argument("OUT carries the natural condition and cannot be constrained");
  for (Tag t : {Tag::IN, Tag::WALL, Tag::FREE})
    if (!tag_values.count(t))
      throw std::invalid_argument(std::string("apply_dirichlet: missing tag ") + tag_name(t));

  const DofMap& dm = *system.dofmap;
  std::map<int, double> values;
  for (Tag t : {Tag::IN, Tag::WALL, Tag::FREE}) {
    const BoundaryFunction& f = tag_values.at(t);
    for (int n : dm.boundary_nodes(t)) {
      Vec2 v = f(dm.node_position(n));
      values[2 * n] = v.x;
      values[2 * n + 1] = v.y;
    }
  }
  SaddleSystem out = system;
  out.constrained_dofs.assign(values.begin(), values.end());
  return out;
}

SaddleFactorization::SaddleFactorization(const SaddleSystem& system) : system_(system) {
  K_full_ = system.full_matrix();
  const int n = static_cast<int>(K_full_.rows());
  std::vector<char> fixed(n, 0);
  for (const auto& [dof, val] : system.constrained_dofs) fixed[dof] = 1;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(K_full_.nonZeros() + system.constrained_dofs.size());
  for (int k = 0; k < K_full_.outerSize(); ++k)
    for (SpMat::InnerIterator it(K_full_, k); it; ++it)
      if (!fixed[it.row()] && !fixed[it.col()])
        trip.emplace_back(it.row(), it.col(), it.value());
  for (const auto& [dof, val] : system.constrained_dofs) trip.emplace_back(dof, dof, 1.0);
  K_.resize(n, n);
  K_.setFromTriplets(trip.begin(), trip.end());

  lu_.compute(K_);
  if (lu_.info() != Eigen::Success)
    throw std::runtime_error("sparse factorization failed (degenerate mesh?)");
}

Eigen::VectorXd SaddleFactorization::solve(const Eigen::VectorXd& rhs) const {
  return solve_with_values(rhs, system_.constrained_dofs);
}

Eigen::VectorXd SaddleFactorization::solve_with_values(
    const Eigen::VectorXd& rhs, const std::vector<std::pair<int, double>>& values) const {
  const int n = static_cast<int>(K_full_.rows());
  if (rhs.size() != n) throw std::invalid_argument("rhs size mismatch");
  std::vector<char> fixed(n, 0);
  for (const auto& [dof, val] : values) fixed[dof] = 1;

  Eigen::VectorXd b = rhs;
  for (const auto& [dof, val] : values) {
    if (val != 0.0)
      for (SpMat::InnerIterator it(K_full_, dof); it; ++it)
        if (!fixed[it.row()]) b[it.row()] -= it.value() * val;
  }
  for (const auto& [dof, val] : values) b[dof] = val;

  Eigen::VectorXd x = lu_.solve(b);
  if (lu_.info() != Eigen::Success) throw std::runtime_error("sparse solve failed");
  return x;
}

std::pair<Field, Field> solve_saddle(const SaddleSystem& system, const Eigen::VectorXd& rhs) {
  const DofMap& dm = *system.dofmap;
  const auto& out_dofs = dm.boundary_velocity_dofs(Tag::OUT);
  bool out_free = false;
  for (int d : out_dofs)
    if (!system.is_constrained(d)) out_free = true;
  if (!out_free)
    throw std::runtime_error(
        "saddle solve needs a free OUT dof (natural outflow fixes the pressure)");

  SaddleFactorization fact(system);
  Eigen::VectorXd x = fact.solve(rhs);

  // weak residual against every unconstrained test dof
  Eigen::VectorXd kx = fact.full_matrix() * x;
  double res2 = 0.0;
  for (int i = 0; i < rhs.size(); ++i)
    if (!system.is_constrained(i)) res2 += (kx[i] - rhs[i]) * (kx[i] - rhs[i]);
  double scale = std::max({rhs.norm(), x.norm(), 1e-300});
  if (std::sqrt(res2) > 1e-10 * scale)
    throw std::runtime_error("saddle solve residual exceeds tolerance");

  const int nvel = dm.num_velocity_dofs();
  Field vel(system.dofmap, Field::Kind::VectorQuadratic);
  Field pre(system.dofmap, Field::Kind::ScalarLinear);
  vel.coeffs = x.head(nvel);
  pre.coeffs = x.tail(dm.num_pressure_dofs());
  return {std::move(vel), std::move(pre)};
}

Eigen::VectorXd assemble_volume_load(const DofMap& dm, const BoundaryFunction& f) {
  const Mesh& mesh = dm.mesh();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(dm.num_velocity_dofs());
  const auto& rule = tri_rule_deg4();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    ElementGeometry geo(mesh, t);
    const auto& nodes = dm.triangle_nodes(t);
    for (const QPoint& q : rule) {
      double w = q.w * geo.area;
      Vec2 fx = f(geo.map(q.xi, q.eta));
      auto phi = p2_values(q.xi, q.eta);
      for (int n = 0; n < 6; ++n) {
        load[2 * nodes[n]] += w * fx.x * phi[n];
        load[2 * nodes[n] + 1] += w * fx.y * phi[n];
      }
    }
  }
  return load;
}

Eigen::VectorXd assemble_outflow_traction(const DofMap& dm, const BoundaryFunction& traction) {
  const Mesh& mesh = dm.mesh();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(dm.num_velocity_dofs());
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const BoundaryEdge& e = mesh.boundary_edges[k];
    if (e.tag != Tag::OUT) continue;
    const Vec2& a = mesh.vertices[e.a];
    const Vec2& b = mesh.vertices[e.b];
    double len = dist(a, b);
    int nodes[3] = {e.a, e.b, dm.boundary_edge_midnode(k)};
    for (const QPoint1& q : edge_rule()) {
      Vec2 x = a + (b - a) * q.t;
      Vec2 tx = traction(x);
      auto phi = p2_edge_values(q.t);
      for (int n = 0; n < 3; ++n) {
        load[2 * nodes[n]] += q.w * len * tx.x * phi[n];
        load[2 * nodes[n] + 1] += q.w * len * tx.y * phi[n];
      }
    }
  }
  return load;
}

void write_triplets(std::ostream& os, const SpMat& m) {
  os.precision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
}

}  // namespace vortexshape
