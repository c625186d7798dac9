#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "vortexshape/shapegrad.hpp"

namespace vortexshape {

enum class Algorithm { aL, dF };

struct RunConfig {
  Algorithm algorithm = Algorithm::dF;
  double gamma1 = 1.0;
  double gamma2 = 0.0;
  double alpha = 5.0;
  double nu = 0.01;

  double beta = 0.1;          // step-size scale in t0 = beta |J| / |theta|^2_{Gamma_f}
  double gamma_smooth = 0.1;  // H1 smoothing weight of the deformation solve
  double epsilon = 2.5e-3;    // normal-extension regularization

  double ell0 = 0.0;  // aL multiplier start
  double b0 = 1e-4;   // aL penalty start
  double tau_mult = 1.05;
  double b_bar = 10.0;

  std::optional<double> target_volume;  // m; defaults to the initial volume

  double tol = 1e-6;
  int max_iter = 50;
  int max_halvings = 12;

  ChannelGeometry geometry;
  double h_min = 1.0 / 50.0;
  double h_max = 1.0 / 30.0;
  bool adapt_initial = true;
  bool adapt_every = false;  // remesh by |u| after every accepted step
  std::uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument
};

struct IterationRecord {
  int iteration = 0;
  ObjectiveBreakdown breakdown;
  double step = 0.0;  // accepted t_k (0 for the initial record)
  int retries = 0;    // line-search halvings before acceptance
  double ell = 0.0;
  double b = 0.0;
  QualityReport quality;
  bool accepted = true;
  // line-search baseline under the same multipliers; accepted implies
  // breakdown value < value_before
  double value_before = 0.0;
  double descent_pairing = 0.0;  // <grad K, theta . n>, nonpositive by construction
};

enum class RunStatus {
  ConvergedTol,
  ConvergedZeroGradient,
  MaxIterations,
  NoDescentStep,
  SolverError,
};

const char* run_status_name(RunStatus s);

struct OptimizeResult {
  RunStatus status = RunStatus::MaxIterations;
  std::vector<IterationRecord> records;
  Mesh final_mesh;
  std::vector<Polyline> boundary_history;  // FREE polyline per record
  std::string error_message;

  double initial_value() const;  // objective (dF) or Lagrangian (aL) at start
  double final_value() const;
};

// H1 deformation solve (lambda = 0 plain, lambda = 1 divergence-free):
//   gamma a(theta, phi) + (theta, phi) + lambda b(vartheta, phi) = -(gradK n, phi)_{Gamma_f}
//   lambda b(psi, theta) = 0
// with theta = 0 on IN, WALL and OUT.
Field solve_deformation(const SaddleSystem& system, const BoundaryScalar& gradK,
                        const BoundaryFrame& frame, double gamma_smooth, int lambda);
Field solve_deformation(const Mesh& mesh, const BoundaryScalar& gradK, double gamma_smooth,
                        int lambda);

// t0 = beta |value| / ||theta||^2_{L2(Gamma_f)}; empty when the trace norm is
// below 1e-14 (converged).
std::optional<double> initial_step(double objective_value, const Field& theta, double beta);

struct LineSearchResult {
  Mesh mesh;
  double t = 0.0;
  int retries = 0;
  double value = 0.0;
};

// Tries t0, t0/2, ... (max_halvings halvings); accepts the first step whose
// deformed mesh is non-degenerate and whose evaluated value strictly
// decreases. The evaluator returns nullopt on solver failure.
std::optional<LineSearchResult> line_search(
    const Mesh& mesh, const Field& theta, double t0, double current_value,
    const std::function<std::optional<double>(const Mesh&)>& evaluate, int max_halvings = 12);

// ell' = ell - b F; b' = tau b while b < b_bar
std::pair<double, double> update_multipliers(double ell, double b, double volume_defect,
                                             double tau_mult, double b_bar);

using IterationCallback = std::function<void(const IterationRecord&)>;

OptimizeResult optimize(const RunConfig& config, const IterationCallback& on_iteration = {});

}  // namespace vortexshape
