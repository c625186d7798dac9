#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vortexshape/descent.hpp"
#include "vortexshape/flow.hpp"

using namespace vortexshape;

namespace {

struct Pipeline {
  std::shared_ptr<Mesh> mesh;
  std::shared_ptr<DofMap> dm;
  SaddleSystem sys;
  BoundaryFrame frame;
  BoundaryScalar kappa;

  explicit Pipeline(double h_min = 1.0 / 25.0, double h_max = 1.0 / 15.0) {
    mesh = std::make_shared<Mesh>(build_channel_mesh(ChannelGeometry{}, h_min, h_max));
    dm = std::make_shared<DofMap>(mesh);
    sys = assemble(dm, 1.0);
    frame = boundary_frame(*dm);
    Field N = extend_normal(dm, 2.5e-3, &sys.A);
    kappa = curvature(N);
  }
};

}  // namespace

TEST_CASE("deformation solve: zero load, boundary conditions, divergence") {
  Pipeline p;

  BoundaryScalar zero = p.kappa;
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  for (int lambda : {0, 1}) {
    Field theta = solve_deformation(p.sys, zero, p.frame, 0.1, lambda);
    CHECK(theta.coeffs.cwiseAbs().maxCoeff() < 1e-14);
  }

  for (int lambda : {0, 1}) {
    CAPTURE(lambda);
    Field theta = solve_deformation(p.sys, p.kappa, p.frame, 0.1, lambda);
    CHECK(theta.coeffs.cwiseAbs().maxCoeff() > 0.0);
    for (Tag t : {Tag::IN, Tag::WALL, Tag::OUT})
      for (int n : p.dm->boundary_nodes(t)) CHECK(norm(theta.node_value(n)) <= 1e-12);
    if (lambda == 1) {
      Eigen::VectorXd div = p.sys.B * theta.coeffs;
      CHECK(div.cwiseAbs().maxCoeff() <=
            1e-10 * std::max(1.0, theta.coeffs.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("descent pairing identity") {
  Pipeline p;
  const double gamma = 0.07;
  for (int lambda : {0, 1}) {
    CAPTURE(lambda);
    Field theta = solve_deformation(p.sys, p.kappa, p.frame, gamma, lambda);
    double pairing = boundary_pairing(p.kappa, theta, p.frame);
    // test the weak equation with phi = theta:
    // (gradK, theta.n) = -[gamma |grad theta|^2 + |theta|^2]
    double energy = gamma * theta.coeffs.dot(p.sys.A * theta.coeffs) +
                    theta.coeffs.dot(p.sys.M * theta.coeffs);
    CHECK(pairing <= 0.0);
    CHECK(pairing == doctest::Approx(-energy).epsilon(1e-8));
  }
}

TEST_CASE("initial step formula") {
  Pipeline p;
  Field theta = solve_deformation(p.sys, p.kappa, p.frame, 0.1, 1);
  double n2 = free_boundary_l2sq(theta);
  REQUIRE(n2 > 0.0);

  auto t0 = initial_step(2.0, theta, 0.1);
  REQUIRE(t0.has_value());
  CHECK(*t0 == doctest::Approx(0.1 * 2.0 / n2).epsilon(1e-14));

  auto t0b = initial_step(2.0, theta, 0.2);
  CHECK(*t0b == doctest::Approx(2.0 * *t0).epsilon(1e-14));

  // negative objective: guard keeps the step positive
  auto t0n = initial_step(-2.0, theta, 0.1);
  CHECK(*t0n == doctest::Approx(*t0).epsilon(1e-14));

  Field null_theta(p.dm, Field::Kind::VectorQuadratic);
  CHECK_FALSE(initial_step(2.0, null_theta, 0.1).has_value());
}

TEST_CASE("line search accepts descent, rejects ascent, halves oversized steps") {
  Pipeline p;
  const double nu = 0.01;
  FunctionalParams params{1.0, 0.0, 5.0, 0, 0, 0};

  StokesSolver solver(p.mesh, nu);
  StateSolution st = solver.solve_state(poiseuille_inflow);
  AdjointSolution adj = solver.solve_adjoint(st, params.gamma1, params.gamma2);
  BoundaryScalar gradG = shape_gradient(*p.mesh, st, adj, p.kappa, p.frame, params, nu);
  Field theta = solve_deformation(p.sys, gradG, p.frame, 0.1, 1);
  ObjectiveBreakdown bd = eval_breakdown(*p.mesh, st, params);

  auto evaluate = [&](const Mesh& m) -> std::optional<double> {
    try {
      auto mp = std::make_shared<Mesh>(m);
      StokesSolver s(mp, nu);
      StateSolution stm = s.solve_state(poiseuille_inflow);
      return eval_breakdown(*mp, stm, params).objective;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };

  auto t0 = initial_step(bd.objective, theta, 0.05);
  REQUIRE(t0.has_value());

  SUBCASE("descent direction accepted") {
    auto ls = line_search(*p.mesh, theta, *t0, bd.objective, evaluate, 12);
    REQUIRE(ls.has_value());
    CHECK(ls->value < bd.objective);
    CHECK(ls->t > 0.0);
  }

  SUBCASE("flipped (ascent) direction rejected") {
    Field up = theta;
    up.coeffs = -theta.coeffs;
    auto ls = line_search(*p.mesh, up, *t0, bd.objective, evaluate, 6);
    CHECK_FALSE(ls.has_value());
  }

  SUBCASE("oversized step halves at least once before acceptance") {
    // a step this large inverts elements near the obstacle
    double big = 0.5 / theta.coeffs.cwiseAbs().maxCoeff();
    auto ls = line_search(*p.mesh, theta, big, bd.objective, evaluate, 12);
    REQUIRE(ls.has_value());
    CHECK(ls->retries >= 1);
    CHECK(ls->t < big);
  }
}

TEST_CASE("multiplier update rule") {
  auto [ell1, b1] = update_multipliers(20.0, 1e-4, 0.01, 1.05, 10.0);
  CHECK(ell1 == doctest::Approx(19.999999).epsilon(1e-12));
  CHECK(b1 == doctest::Approx(1.05e-4).epsilon(1e-12));

  auto [ell2, b2] = update_multipliers(5.0, 10.0, 0.5, 1.05, 10.0);
  CHECK(b2 == 10.0);  // frozen at the target
  CHECK(ell2 == doctest::Approx(0.0));

  auto [ell3, b3] = update_multipliers(7.0, 2.0, 0.0, 1.5, 10.0);
  CHECK(ell3 == 7.0);
  CHECK(b3 == 3.0);
}

TEST_CASE("optimize: stopping rules and record invariants") {
  RunConfig cfg;
  cfg.algorithm = Algorithm::dF;
  cfg.gamma1 = 1.0;
  cfg.gamma2 = 0.0;
  cfg.alpha = 5.0;
  cfg.h_min = 1.0 / 16.0;
  cfg.h_max = 1.0 / 10.0;
  cfg.adapt_initial = false;
  cfg.max_iter = 3;

  SUBCASE("huge tolerance stops after the first accepted iteration") {
    cfg.tol = 1e9;
    OptimizeResult res = optimize(cfg);
    CHECK(res.status == RunStatus::ConvergedTol);
    CHECK(res.records.size() == 2);
  }

  SUBCASE("max_iter = 0 leaves only the initial record") {
    cfg.max_iter = 0;
    OptimizeResult res = optimize(cfg);
    CHECK(res.records.size() == 1);
    CHECK(res.records[0].iteration == 0);
    CHECK(res.status == RunStatus::MaxIterations);
  }

  SUBCASE("records: monotone values, nonpositive pairings, simple boundaries") {
    OptimizeResult res = optimize(cfg);
    REQUIRE(res.status != RunStatus::SolverError);
    REQUIRE(res.records.size() >= 2);
    for (std::size_t i = 1; i < res.records.size(); ++i) {
      const IterationRecord& rec = res.records[i];
      CHECK(rec.accepted);
      CHECK(rec.breakdown.objective < rec.value_before);
      CHECK(rec.descent_pairing <= 0.0);
      CHECK_FALSE(rec.quality.degenerate);
      CHECK(polyline_is_simple(res.boundary_history[i]));
    }
    // dF keeps the volume nearly constant per step
    for (std::size_t i = 1; i < res.records.size(); ++i) {
      double dv = std::abs(res.records[i].breakdown.volume -
                           res.records[i - 1].breakdown.volume);
      CHECK(dv / res.records[i - 1].breakdown.volume <= 0.005);
    }
  }

  SUBCASE("invalid configs rejected") {
    cfg.beta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.beta = 0.1;
    cfg.algorithm = Algorithm::aL;
    cfg.b0 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
}
