#include "vortexshape/descent.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "vortexshape/flow.hpp"
#include "vortexshape/quadrature.hpp"

namespace vortexshape {

void RunConfig::validate() const {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (!(gamma_smooth > 0.0)) throw std::invalid_argument("gamma_smooth must be > 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be > 0");
  if (max_iter < 0) throw std::invalid_argument("max_iter must be >= 0");
  if (!(h_min > 0.0) || !(h_min <= h_max))
    throw std::invalid_argument("mesh sizes must satisfy 0 < h_min <= h_max");
  if (algorithm == Algorithm::aL) {
    if (!(tau_mult > 1.0)) throw std::invalid_argument("tau_mult must be > 1");
    if (!(b0 > 0.0) || !(b_bar > b0))
      throw std::invalid_argument("aL requires b_bar > b0 > 0");
  }
  geometry.validate();
}

const char* run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::ConvergedTol: return "converged (tolerance)";
    case RunStatus::ConvergedZeroGradient: return "converged (zero gradient)";
    case RunStatus::MaxIterations: return "max iterations reached";
    case RunStatus::NoDescentStep: return "no descent step found";
    case RunStatus::SolverError: return "solver error";
  }
  return "?";
}

double OptimizeResult::initial_value() const {
  return records.empty() ? 0.0 : records.front().breakdown.objective;
}

double OptimizeResult::final_value() const {
  return records.empty() ? 0.0 : records.back().breakdown.objective;
}

Field solve_deformation(const SaddleSystem& system, const BoundaryScalar& gradK,
                        const BoundaryFrame& frame, double gamma_smooth, int lambda) {
  if (lambda != 0 && lambda != 1)
    throw std::invalid_argument("lambda must be 0 or 1");
  if (!(gamma_smooth > 0.0)) throw std::invalid_argument("gamma_smooth must be > 0");
  const DofMap& dm = *system.dofmap;
  const Mesh& mesh = dm.mesh();
  const int nv = dm.num_velocity_dofs();
  const int np = dm.num_pressure_dofs();

  // boundary load -(gradK n, phi)_{Gamma_f}
  Eigen::VectorXd load = Eigen::VectorXd::Zero(nv);
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const BoundaryEdge& e = mesh.boundary_edges[k];
    if (e.tag != Tag::FREE) continue;
    const Vec2& a = mesh.vertices[e.a];
    const Vec2& b = mesh.vertices[e.b];
    double len = dist(a, b);
    int nodes[3] = {e.a, e.b, dm.boundary_edge_midnode(static_cast<int>(k))};
    for (const QPoint1& q : edge_rule()) {
      auto phi = p2_edge_values(q.t);
      double g = 0.0;
      Vec2 nq{0, 0};
      for (int i = 0; i < 3; ++i) {
        g += phi[i] * gradK.value_at(nodes[i]);
        nq += phi[i] * frame.normal[frame.index_of(nodes[i])];
      }
      for (int i = 0; i < 3; ++i) {
        load[2 * nodes[i]] -= q.w * len * g * nq.x * phi[i];
        load[2 * nodes[i] + 1] -= q.w * len * g * nq.y * phi[i];
      }
    }
  }

  // Dirichlet: zero on IN, WALL and OUT; FREE moves
  std::vector<char> fixed(nv, 0);
  for (Tag t : {Tag::IN, Tag::WALL, Tag::OUT})
    for (int d : dm.boundary_velocity_dofs(t)) fixed[d] = 1;

  SpMat H = (gamma_smooth / system.nu) * system.A + system.M;

  if (lambda == 0) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(H.nonZeros());
    for (int k = 0; k < H.outerSize(); ++k)
      for (SpMat::InnerIterator it(H, k); it; ++it)
        if (!fixed[it.row()] && !fixed[it.col()])
          trip.emplace_back(it.row(), it.col(), it.value());
    for (int d = 0; d < nv; ++d)
      if (fixed[d]) trip.emplace_back(d, d, 1.0);
    SpMat K(nv, nv);
    K.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<SpMat> ldlt(K);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("deformation solve: factorization failed");
    for (int d = 0; d < nv; ++d)
      if (fixed[d]) load[d] = 0.0;
    Field theta(system.dofmap, Field::Kind::VectorQuadratic);
    theta.coeffs = ldlt.solve(load);
    return theta;
  }

  // lambda = 1: saddle system with the divergence constraint
  const int n = nv + np;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(H.nonZeros() + 2 * system.B.nonZeros());
  for (int k = 0; k < H.outerSize(); ++k)
    for (SpMat::InnerIterator it(H, k); it; ++it)
      if (!fixed[it.row()] && !fixed[it.col()])
        trip.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < system.B.outerSize(); ++k) {
    for (SpMat::InnerIterator it(system.B, k); it; ++it) {
      if (fixed[it.col()]) continue;
      trip.emplace_back(nv + it.row(), it.col(), it.value());
      trip.emplace_back(it.col(), nv + it.row(), it.value());
    }
  }
  for (int d = 0; d < nv; ++d)
    if (fixed[d]) trip.emplace_back(d, d, 1.0);
  SpMat K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<SpMat> lu(K);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("deformation solve: factorization failed");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs.head(nv) = load;
  for (int d = 0; d < nv; ++d)
    if (fixed[d]) rhs[d] = 0.0;
  Eigen::VectorXd x = lu.solve(rhs);
  Field theta(system.dofmap, Field::Kind::VectorQuadratic);
  theta.coeffs = x.head(nv);
  return theta;
}

Field solve_deformation(const Mesh& mesh, const BoundaryScalar& gradK, double gamma_smooth,
                        int lambda) {
  auto dm = std::make_shared<DofMap>(std::make_shared<Mesh>(mesh));
  SaddleSystem sys = assemble(dm, 1.0);
  BoundaryFrame frame = boundary_frame(*dm);
  return solve_deformation(sys, gradK, frame, gamma_smooth, lambda);
}

std::optional<double> initial_step(double objective_value, const Field& theta, double beta) {
  double n2 = free_boundary_l2sq(theta);
  if (n2 <= 1e-28) return std::nullopt;
  // the objective can be negative (J = alpha P - J1 - J2); keep t0 positive
  return beta * std::abs(objective_value) / n2;
}

std::optional<LineSearchResult> line_search(
    const Mesh& mesh, const Field& theta, double t0, double current_value,
    const std::function<std::optional<double>(const Mesh&)>& evaluate, int max_halvings) {
  if (!(t0 > 0.0)) throw std::invalid_argument("line_search: t0 must be > 0");
  double t = t0;
  for (int k = 0; k <= max_halvings; ++k, t *= 0.5) {
    Mesh candidate = apply_deformation(mesh, theta, t);
    if (mesh_quality(candidate).degenerate) continue;
    bool simple = true;
    try {
      if (candidate.has_tag(Tag::FREE)) simple = polyline_is_simple(candidate.free_polyline());
    } catch (const std::exception&) {
      simple = false;
    }
    if (!simple) continue;
    std::optional<double> value = evaluate(candidate);
    if (!value) continue;
    if (*value < current_value) return LineSearchResult{std::move(candidate), t, k, *value};
  }
  return std::nullopt;
}

std::pair<double, double> update_multipliers(double ell, double b, double volume_defect,
                                             double tau_mult, double b_bar) {
  double ell_next = ell - b * volume_defect;
  double b_next = b < b_bar ? tau_mult * b : b;
  return {ell_next, b_next};
}

namespace {

struct IterationState {
  std::shared_ptr<Mesh> mesh;
  std::unique_ptr<StokesSolver> solver;
  StateSolution state;
  ObjectiveBreakdown breakdown;
};

}  // namespace

OptimizeResult optimize(const RunConfig& config, const IterationCallback& on_iteration) {
  config.validate();
  const bool aL = config.algorithm == Algorithm::aL;
  const int lambda = aL ? 0 : 1;

  OptimizeResult result;
  try {
    auto mesh = std::make_shared<Mesh>(
        build_channel_mesh(config.geometry, config.h_min, config.h_max, config.seed));
    if (config.adapt_initial) {
      StokesSolver pre(mesh, config.nu);
      StateSolution st = pre.solve_state(poiseuille_inflow);
      mesh = std::make_shared<Mesh>(
          adapt_mesh(*mesh, st.u, config.h_min, config.h_max, config.seed));
    }

    double ell = aL ? config.ell0 : 0.0;
    double b = aL ? config.b0 : 0.0;

    FunctionalParams params;
    params.gamma1 = config.gamma1;
    params.gamma2 = config.gamma2;
    params.alpha = config.alpha;
    params.ell = ell;
    params.b = b;

    auto solve_on = [&](std::shared_ptr<Mesh> m) {
      IterationState st;
      st.mesh = std::move(m);
      st.solver = std::make_unique<StokesSolver>(st.mesh, config.nu);
      st.state = st.solver->solve_state(poiseuille_inflow);
      st.breakdown = eval_breakdown(*st.mesh, st.state, params);
      return st;
    };

    IterationState cur = solve_on(mesh);
    params.m = config.target_volume.value_or(cur.breakdown.volume);
    cur.breakdown = eval_breakdown(*cur.mesh, cur.state, params);

    auto record_of = [&](int iter, const IterationState& st, double t, int retries,
                         double before, double pairing) {
      IterationRecord rec;
      rec.iteration = iter;
      rec.breakdown = st.breakdown;
      rec.step = t;
      rec.retries = retries;
      rec.ell = ell;
      rec.b = b;
      rec.quality = mesh_quality(*st.mesh);
      rec.accepted = true;
      rec.value_before = before;
      rec.descent_pairing = pairing;
      return rec;
    };

    auto push_record = [&](const IterationRecord& rec, const IterationState& st) {
      result.records.push_back(rec);
      result.boundary_history.push_back(st.mesh->free_polyline());
      if (on_iteration) on_iteration(rec);
    };

    push_record(record_of(0, cur, 0.0, 0, 0.0, 0.0), cur);

    double value = aL ? cur.breakdown.lagrangian : cur.breakdown.objective;
    result.status = RunStatus::MaxIterations;

    for (int k = 1; k <= config.max_iter; ++k) {
      AdjointSolution adjoint =
          cur.solver->solve_adjoint(cur.state, config.gamma1, config.gamma2);
      SpMat stiffness = (1.0 / config.nu) * cur.solver->system().A;
      BoundaryFrame frame = boundary_frame(cur.solver->dofmap());
      Field N = extend_normal(cur.solver->dofmap_ptr(), config.epsilon, &stiffness, &frame);
      BoundaryScalar kappa = curvature(N, &frame);
      BoundaryScalar gradG = shape_gradient(*cur.mesh, cur.state, adjoint, kappa, frame,
                                            params, config.nu);
      BoundaryScalar gradK =
          aL ? lagrangian_gradient(gradG, ell, b, cur.breakdown.volume, params.m) : gradG;
      Field theta = solve_deformation(cur.solver->system(), gradK, frame,
                                      config.gamma_smooth, lambda);
      double pairing = boundary_pairing(gradK, theta, frame);

      std::optional<double> t0 = initial_step(value, theta, config.beta);
      if (!t0) {
        result.status = RunStatus::ConvergedZeroGradient;
        break;
      }

      auto evaluate = [&](const Mesh& m) -> std::optional<double> {
        try {
          auto mp = std::make_shared<Mesh>(m);
          StokesSolver s(mp, config.nu);
          StateSolution st = s.solve_state(poiseuille_inflow);
          ObjectiveBreakdown bd = eval_breakdown(*mp, st, params);
          return aL ? bd.lagrangian : bd.objective;
        } catch (const std::exception&) {
          return std::nullopt;
        }
      };

      std::optional<LineSearchResult> ls =
          line_search(*cur.mesh, theta, *t0, value, evaluate, config.max_halvings);
      if (!ls) {
        result.status = RunStatus::NoDescentStep;
        break;
      }

      IterationState next = solve_on(std::make_shared<Mesh>(std::move(ls->mesh)));
      push_record(record_of(k, next, ls->t, ls->retries, value, pairing), next);

      double new_value = aL ? next.breakdown.lagrangian : next.breakdown.objective;
      bool converged = std::abs(new_value - value) < config.tol;

      if (aL) {
        std::tie(ell, b) = update_multipliers(ell, b, next.breakdown.volume_defect(),
                                              config.tau_mult, config.b_bar);
        params.ell = ell;
        params.b = b;
        next.breakdown = eval_breakdown(*next.mesh, next.state, params);
      }
      cur = std::move(next);
      if (config.adapt_every) {
        // re-adaptation changes the discrete landscape; the next line search
        // compares against the value on the fresh mesh
        cur = solve_on(std::make_shared<Mesh>(
            adapt_mesh(*cur.mesh, cur.state.u, config.h_min, config.h_max, config.seed)));
      }
      value = aL ? cur.breakdown.lagrangian : cur.breakdown.objective;

      if (converged) {
        result.status = RunStatus::ConvergedTol;
        break;
      }
    }
    result.final_mesh = *cur.mesh;
  } catch (const std::exception& e) {
    result.status = RunStatus::SolverError;
    result.error_message = e.what();
  }
  return result;
}

}  // namespace vortexshape
