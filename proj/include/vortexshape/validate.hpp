#pragma once

#include "vortexshape/flow.hpp"

namespace vortexshape {

// Smooth divergence-free reference problem on the unit square with a natural
// (traction) condition on the right edge.
struct ManufacturedCase {
  double nu = 0.01;
  BoundaryFunction velocity;
  BoundaryFunction velocity_grad_row0;  // grad of u1 as a vector
  BoundaryFunction velocity_grad_row1;  // grad of u2
  std::function<double(const Vec2&)> pressure;
  BoundaryFunction body_force;
  BoundaryFunction outflow_traction;
};

ManufacturedCase manufactured_trig(double nu = 0.01);

struct ConvergenceRow {
  double h = 0.0;
  double err_u_h1 = 0.0;
  double err_p_l2 = 0.0;
  double energy = 0.0;  // |u|_H1 + |p|_L2, monitored for boundedness
};

// Solves the manufactured case on n0, 2*n0, ... structured squares.
std::vector<ConvergenceRow> manufactured_convergence(int levels, int n0, double nu = 0.01);

// H1/L2 errors of a state against the manufactured solution (degree-5 rule).
ConvergenceRow manufactured_errors(const ManufacturedCase& mc, const StateSolution& state);

// Solve with Dirichlet data taken from an expression on IN, WALL and FREE
// (manufactured runs; the channel path uses StokesSolver::solve_state).
StateSolution solve_dirichlet(const StokesSolver& solver, const BoundaryFunction& data,
                              const BoundaryFunction& body_force,
                              const BoundaryFunction& outflow_traction);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed() const;
};

// Built-in oracle bundle: h-function table, manufactured convergence, exact
// Poiseuille reproduction, finite-difference shape-derivative check (also
// adjudicating the nu factor on dv/dn), and the divergence-free deformation
// volume check.
ValidationReport run_validation(std::ostream& log);

}  // namespace vortexshape
