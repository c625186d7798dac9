#pragma once

#include <memory>

#include "vortexshape/fem.hpp"

namespace vortexshape {

// Total velocity u (= lifted inflow + homogeneous part), pressure, and the
// discrete inflow lifting used for the split.
struct StateSolution {
  Field u;
  Field p;
  Field g_lift;
};

struct AdjointSolution {
  Field v;
  Field pi;
};

// Discrete lifting of the inflow profile: the profile interpolated at every
// velocity node, then clipped to zero on WALL and FREE nodes. Rejects data
// that is nonzero at IN/WALL corner nodes.
Field lift_inflow(std::shared_ptr<const DofMap> dofmap, const BoundaryFunction& profile);

// Vortex-functional derivative as a dual vector on velocity dofs:
//   phi -> -gamma1 (curl u, curl phi) - gamma2 (h'(det grad u) dDet(grad u)[grad phi]).
Eigen::VectorXd adjoint_rhs(const StateSolution& state, double gamma1, double gamma2);

// Stokes operator on a fixed mesh. Assembles once, factorizes once; the state
// and adjoint solves share the factorization (the eliminated matrix is
// symmetric, so operator and adjoint coincide).
class StokesSolver {
 public:
  StokesSolver(std::shared_ptr<const Mesh> mesh, double nu);

  const DofMap& dofmap() const { return *dofmap_; }
  std::shared_ptr<const DofMap> dofmap_ptr() const { return dofmap_; }
  const SaddleSystem& system() const { return system_; }
  const SaddleFactorization& factorization() const { return *fact_; }
  double nu() const { return system_.nu; }

  StateSolution solve_state(const BoundaryFunction& inflow_profile,
                            const BoundaryFunction& body_force = nullptr,
                            const BoundaryFunction& outflow_traction = nullptr) const;
  AdjointSolution solve_adjoint(const StateSolution& state, double gamma1,
                                double gamma2) const;

 private:
  void check_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& rhs,
                      const std::vector<std::pair<int, double>>& values) const;

  std::shared_ptr<const DofMap> dofmap_;
  SaddleSystem system_;  // constrained_dofs = IN/WALL/FREE index set (zero values)
  std::unique_ptr<SaddleFactorization> fact_;
};

// default experiment inflow g = (1.2 (0.25 - y^2), 0)
Vec2 poiseuille_inflow(const Vec2& x);

// convenience wrappers over a throwaway solver
StateSolution solve_state(std::shared_ptr<const Mesh> mesh, double nu,
                          const BoundaryFunction& body_force,
                          const BoundaryFunction& inflow_profile);
AdjointSolution solve_adjoint(std::shared_ptr<const Mesh> mesh, const StateSolution& state,
                              double nu, double gamma1, double gamma2);

}  // namespace vortexshape
