#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Sparse>

#include "vortexshape/dofmap.hpp"

namespace vortexshape {

using SpMat = Eigen::SparseMatrix<double>;
using BoundaryFunction = std::function<Vec2(const Vec2&)>;

// Assembled Stokes saddle blocks over a Taylor-Hood dof map:
//   A = nu * vector stiffness, B = divergence coupling, M = vector mass.
// constrained_dofs (filled by apply_dirichlet) lists velocity dofs eliminated
// symmetrically together with their Dirichlet values.
struct SaddleSystem {
  std::shared_ptr<const DofMap> dofmap;
  double nu = 1.0;
  SpMat A;  // nv x nv, symmetric
  SpMat B;  // np x nv
  SpMat M;  // nv x nv
  std::vector<std::pair<int, double>> constrained_dofs;  // sorted by dof

  // full saddle matrix [[A, B^T], [B, 0]] without constraints
  SpMat full_matrix() const;
  bool is_constrained(int dof) const;
};

SaddleSystem assemble(std::shared_ptr<const DofMap> dofmap, double nu);

// Symmetric elimination of Dirichlet velocity dofs. The map must provide
// entries for IN, WALL and FREE (values interpolated at dof positions) and
// must not constrain OUT, which stays natural (do-nothing).
SaddleSystem apply_dirichlet(const SaddleSystem& system,
                             const std::map<Tag, BoundaryFunction>& tag_values);

// Factorization of the eliminated saddle matrix; reusable across right-hand
// sides and across Dirichlet values (state and adjoint share it).
class SaddleFactorization {
 public:
  explicit SaddleFactorization(const SaddleSystem& system);
  // rhs is a dual vector of length num_saddle_dofs (velocity block then
  // pressure block); constrained entries of the result take the given values
  // (defaults to the system's stored Dirichlet values).
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd solve_with_values(const Eigen::VectorXd& rhs,
                                    const std::vector<std::pair<int, double>>& values) const;
  const SpMat& eliminated_matrix() const { return K_; }
  const SpMat& full_matrix() const { return K_full_; }

 private:
  const SaddleSystem& system_;
  SpMat K_;       // symmetric-eliminated full matrix
  SpMat K_full_;  // unmodified full matrix, for rhs correction and residuals
  Eigen::SparseLU<SpMat> lu_;
};

// One-shot direct solve; residual checked against 1e-10 * |rhs|.
std::pair<Field, Field> solve_saddle(const SaddleSystem& system, const Eigen::VectorXd& rhs);

// Load functionals.
Eigen::VectorXd assemble_volume_load(const DofMap& dm, const BoundaryFunction& f);
// natural (traction) data on OUT edges; used by manufactured-solution tests
Eigen::VectorXd assemble_outflow_traction(const DofMap& dm, const BoundaryFunction& traction);

// coordinate text format "i j value" per line
void write_triplets(std::ostream& os, const SpMat& m);

// Pointwise evaluation helpers over one triangle.
struct ElementGeometry {
  std::array<Vec2, 3> x;   // vertex coordinates
  double area = 0.0;
  double inv_jac[2][2];    // maps reference gradients to physical
  ElementGeometry(const Mesh& mesh, int t);
  Vec2 map(double xi, double eta) const {
    return x[0] * (1.0 - xi - eta) + x[1] * xi + x[2] * eta;
  }
  Vec2 phys_grad(const Vec2& ref_grad) const {
    return {inv_jac[0][0] * ref_grad.x + inv_jac[1][0] * ref_grad.y,
            inv_jac[0][1] * ref_grad.x + inv_jac[1][1] * ref_grad.y};
  }
};

// 2x2 velocity gradient of a vector-quadratic field at a reference point.
struct Grad2 {
  double g[2][2] = {{0, 0}, {0, 0}};  // g[i][j] = d u_i / d x_j
  double curl() const { return g[1][0] - g[0][1]; }
  double det() const { return g[0][0] * g[1][1] - g[0][1] * g[1][0]; }
  double div() const { return g[0][0] + g[1][1]; }
};

Grad2 field_gradient(const Field& u, const ElementGeometry& geo,
                     const std::array<int, 6>& nodes, double xi, double eta);
Vec2 field_value(const Field& u, const std::array<int, 6>& nodes, double xi, double eta);

}  // namespace vortexshape
