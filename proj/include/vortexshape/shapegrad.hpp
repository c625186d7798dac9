#pragma once

#include <optional>

#include "vortexshape/functionals.hpp"

namespace vortexshape {

// Scalar values attached to the quadratic nodes of the FREE boundary
// (vertices and edge midpoints), in the DofMap's sorted node order.
struct BoundaryScalar {
  std::vector<int> nodes;
  std::vector<double> values;

  int index_of(int node) const;
  double value_at(int node) const { return values[index_of(node)]; }
};

// Outward unit normal (w.r.t. the fluid, pointing into the obstacle) and unit
// tangent per FREE node; (tau, n) is positively oriented.
struct BoundaryFrame {
  std::vector<int> nodes;
  std::vector<Vec2> normal;
  std::vector<Vec2> tangent;

  int index_of(int node) const;
};

BoundaryFrame boundary_frame(const DofMap& dofmap);

// Regularized extension of the boundary normal:
//   eps a(N, phi) + (N, phi)_{Gamma_f} = (n, phi)_{Gamma_f}.
// `stiffness` may pass a prebuilt unit-viscosity vector stiffness block;
// `data` overrides the boundary data (defaults to the computed frame normals).
Field extend_normal(std::shared_ptr<const DofMap> dofmap, double epsilon,
                    const SpMat* stiffness = nullptr, const BoundaryFrame* data = nullptr);

// kappa = div N at FREE nodes, one-sided element values averaged with
// incident-angle weights (negative on the initial circle for the outward-of-
// fluid orientation). Evaluated in surface-divergence form
// div N - n.(grad N)n, which coincides with div N for unit-length extensions
// and stays curvature-consistent for the regularized one.
BoundaryScalar curvature(const Field& N, const BoundaryFrame* frame = nullptr);

// angle-weighted one-sided average of grad(field) at every FREE node
std::vector<Grad2> boundary_gradient(const Field& field);

// (n . grad) field per FREE node
std::vector<Vec2> normal_derivative(const Field& field, const BoundaryFrame& frame);

// Boundary density of the objective's Eulerian derivative:
//   grad G = alpha kappa - gamma1/2 |curl u|^2 - gamma2 h(det grad u)
//            + du/dn . (nu dv/dn + gamma1 (curl u) tau + gamma2 P(u)).
BoundaryScalar shape_gradient(const Mesh& mesh, const StateSolution& state,
                              const AdjointSolution& adjoint, const BoundaryScalar& kappa,
                              const BoundaryFrame& frame, const FunctionalParams& params,
                              double nu);

// nodewise grad L = grad G - ell + b (volume - m)
BoundaryScalar lagrangian_gradient(const BoundaryScalar& gradG, double ell, double b,
                                   double volume, double m);

// int_{Gamma_f} values * (theta . n) ds with quadratic interpolation per edge
double boundary_pairing(const BoundaryScalar& values, const Field& theta,
                        const BoundaryFrame& frame);
double free_boundary_l2sq(const Field& theta);

// Central-difference oracle for the shape derivative. Each step re-solves the
// state on T_{+-t}(mesh) and differences the objective alpha P - J1 - J2.
struct ShapeDerivativeRow {
  double t = 0.0;
  double fd = 0.0;          // central difference value
  double error = 0.0;       // |fd - formula|
  bool skipped = false;     // deformed mesh was degenerate
};

struct ShapeDerivativeReport {
  double formula = 0.0;  // <grad G, theta . n>
  std::vector<ShapeDerivativeRow> rows;
  // order of |FD(t_i) - FD(t_{i+1})| between consecutive usable steps
  std::vector<double> fd_orders;
  double worst_relative_error() const;
};

ShapeDerivativeReport validate_shape_derivative(const Mesh& mesh,
                                                const FunctionalParams& params, double nu,
                                                const BoundaryFunction& inflow,
                                                const Field& theta,
                                                const std::vector<double>& steps,
                                                double epsilon_normal);

}  // namespace vortexshape
