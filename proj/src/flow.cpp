#include "vortexshape/flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vortexshape/functionals.hpp"
#include "vortexshape/quadrature.hpp"

namespace vortexshape {

Vec2 poiseuille_inflow(const Vec2& x) { return {1.2 * (0.25 - x.y * x.y), 0.0}; }

Field lift_inflow(std::shared_ptr<const DofMap> dofmap, const BoundaryFunction& profile) {
  const DofMap& dm = *dofmap;
  // compatibility: the profile must vanish where IN meets WALL
  const auto& in_nodes = dm.boundary_nodes(Tag::IN);
  const auto& wall_nodes = dm.boundary_nodes(Tag::WALL);
  for (int n : in_nodes) {
    if (std::binary_search(wall_nodes.begin(), wall_nodes.end(), n)) {
      Vec2 v = profile(dm.node_position(n));
      if (std::abs(v.x) > 1e-10 || std::abs(v.y) > 1e-10)
        throw std::invalid_argument("inflow profile nonzero at an IN/WALL corner node");
    }
  }
  Field g = interpolate_vector(dofmap, [&](const Vec2& x) { return profile(x); });
  for (Tag t : {Tag::WALL, Tag::FREE})
    for (int n : dm.boundary_nodes(t)) g.set_node_value(n, {0.0, 0.0});
  return g;
}

Eigen::VectorXd adjoint_rhs(const StateSolution& state, double gamma1, double gamma2) {
  const DofMap& dm = *state.u.dofmap;
  const Mesh& mesh = dm.mesh();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dm.num_velocity_dofs());
  if (gamma1 == 0.0 && gamma2 == 0.0) return rhs;

  const auto& rule = tri_rule_deg4();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    ElementGeometry geo(mesh, t);
    const auto& nodes = dm.triangle_nodes(t);
    for (const QPoint& q : rule) {
      double w = q.w * geo.area;
      Grad2 gu = field_gradient(state.u, geo, nodes, q.xi, q.eta);
      double curl = gu.curl();
      double hp = h_prime(gu.det());
      auto ref = p2_gradients(q.xi, q.eta);
      for (int n = 0; n < 6; ++n) {
        Vec2 gn = geo.phys_grad(ref[n]);
        // phi = e_x N: curl phi = -dN/dy, dDet = du2/dy dN/dx - du2/dx dN/dy
        rhs[2 * nodes[n]] += w * (-gamma1 * curl * (-gn.y) -
                                  gamma2 * hp * (gu.g[1][1] * gn.x - gu.g[1][0] * gn.y));
        // phi = e_y N: curl phi = dN/dx, dDet = du1/dx dN/dy - du1/dy dN/dx
        rhs[2 * nodes[n] + 1] += w * (-gamma1 * curl * gn.x -
                                      gamma2 * hp * (gu.g[0][0] * gn.y - gu.g[0][1] * gn.x));
      }
    }
  }
  return rhs;
}

StokesSolver::StokesSolver(std::shared_ptr<const Mesh> mesh, double nu) {
  if (!mesh->has_tag(Tag::OUT))
    throw std::runtime_error("mesh has no OUT boundary; the pressure gauge would be lost");
  dofmap_ = std::make_shared<DofMap>(std::move(mesh));
  system_ = assemble(dofmap_, nu);
  // homogeneous Dirichlet index set on IN, WALL and FREE
  auto zero = [](const Vec2&) { return Vec2{0.0, 0.0}; };
  system_ = apply_dirichlet(system_, {{Tag::IN, zero}, {Tag::WALL, zero}, {Tag::FREE, zero}});
  fact_ = std::make_unique<SaddleFactorization>(system_);
}

void StokesSolver::check_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& rhs,
                                  const std::vector<std::pair<int, double>>& values) const {
  Eigen::VectorXd kx = fact_->full_matrix() * x;
  std::vector<char> fixed(x.size(), 0);
  for (const auto& [dof, val] : values) fixed[dof] = 1;
  double res2 = 0.0;
  for (int i = 0; i < x.size(); ++i)
    if (!fixed[i]) res2 += (kx[i] - rhs[i]) * (kx[i] - rhs[i]);
  double scale = std::max({rhs.norm(), x.norm(), 1e-300});
  if (std::sqrt(res2) > 1e-10 * scale)
    throw std::runtime_error("Stokes solve residual exceeds tolerance");
}

StateSolution StokesSolver::solve_state(const BoundaryFunction& inflow_profile,
                                        const BoundaryFunction& body_force,
                                        const BoundaryFunction& outflow_traction) const {
  const DofMap& dm = *dofmap_;
  Field g = lift_inflow(dofmap_, inflow_profile);

  std::vector<std::pair<int, double>> values = system_.constrained_dofs;
  for (auto& [dof, val] : values) val = g.coeffs[dof];

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dm.num_saddle_dofs());
  if (body_force)
    rhs.head(dm.num_velocity_dofs()) += assemble_volume_load(dm, body_force);
  if (outflow_traction)
    rhs.head(dm.num_velocity_dofs()) += assemble_outflow_traction(dm, outflow_traction);

  Eigen::VectorXd x = fact_->solve_with_values(rhs, values);
  check_residual(x, rhs, values);

  StateSolution sol{Field(dofmap_, Field::Kind::VectorQuadratic),
                    Field(dofmap_, Field::Kind::ScalarLinear), std::move(g)};
  sol.u.coeffs = x.head(dm.num_velocity_dofs());
  sol.p.coeffs = x.tail(dm.num_pressure_dofs());
  return sol;
}

AdjointSolution StokesSolver::solve_adjoint(const StateSolution& state, double gamma1,
                                            double gamma2) const {
  const DofMap& dm = *dofmap_;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dm.num_saddle_dofs());
  rhs.head(dm.num_velocity_dofs()) = adjoint_rhs(state, gamma1, gamma2);

  Eigen::VectorXd x = fact_->solve_with_values(rhs, system_.constrained_dofs);
  check_residual(x, rhs, system_.constrained_dofs);

  AdjointSolution adj{Field(dofmap_, Field::Kind::VectorQuadratic),
                      Field(dofmap_, Field::Kind::ScalarLinear)};
  adj.v.coeffs = x.head(dm.num_velocity_dofs());
  adj.pi.coeffs = x.tail(dm.num_pressure_dofs());
  return adj;
}

StateSolution solve_state(std::shared_ptr<const Mesh> mesh, double nu,
                          const BoundaryFunction& body_force,
                          const BoundaryFunction& inflow_profile) {
  StokesSolver solver(std::move(mesh), nu);
  return solver.solve_state(inflow_profile, body_force);
}

AdjointSolution solve_adjoint(std::shared_ptr<const Mesh> mesh, const StateSolution& state,
                              double nu, double gamma1, double gamma2) {
  StokesSolver solver(std::move(mesh), nu);
  return solver.solve_adjoint(state, gamma1, gamma2);
}

}  // namespace vortexshape
