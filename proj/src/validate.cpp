#include "vortexshape/validate.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "vortexshape/descent.hpp"
#include "vortexshape/quadrature.hpp"

namespace vortexshape {

ManufacturedCase manufactured_trig(double nu) {
  using std::cos;
  using std::sin;
  const double pi = std::numbers::pi;
  ManufacturedCase mc;
  mc.nu = nu;
  // u = curl(sin(pi x) sin(pi y)), pointwise divergence-free
  mc.velocity = [=](const Vec2& x) {
    return Vec2{pi * sin(pi * x.x) * cos(pi * x.y), -pi * cos(pi * x.x) * sin(pi * x.y)};
  };
  mc.velocity_grad_row0 = [=](const Vec2& x) {
    return Vec2{pi * pi * cos(pi * x.x) * cos(pi * x.y),
                -pi * pi * sin(pi * x.x) * sin(pi * x.y)};
  };
  mc.velocity_grad_row1 = [=](const Vec2& x) {
    return Vec2{pi * pi * sin(pi * x.x) * sin(pi * x.y),
                -pi * pi * cos(pi * x.x) * cos(pi * x.y)};
  };
  mc.pressure = [=](const Vec2& x) { return cos(pi * x.x) * sin(pi * x.y); };
  mc.body_force = [=](const Vec2& x) {
    double f1 = 2.0 * nu * pi * pi * pi * sin(pi * x.x) * cos(pi * x.y) -
                pi * sin(pi * x.x) * sin(pi * x.y);
    double f2 = -2.0 * nu * pi * pi * pi * cos(pi * x.x) * sin(pi * x.y) +
                pi * cos(pi * x.x) * cos(pi * x.y);
    return Vec2{f1, f2};
  };
  // natural data -p n + nu du/dn on a vertical right edge, n = (1, 0)
  mc.outflow_traction = [=](const Vec2& x) {
    double du1dx = pi * pi * cos(pi * x.x) * cos(pi * x.y);
    double du2dx = pi * pi * sin(pi * x.x) * sin(pi * x.y);
    return Vec2{-mc.pressure(x) + nu * du1dx, nu * du2dx};
  };
  return mc;
}

StateSolution solve_dirichlet(const StokesSolver& solver, const BoundaryFunction& data,
                              const BoundaryFunction& body_force,
                              const BoundaryFunction& outflow_traction) {
  const DofMap& dm = solver.dofmap();
  std::vector<std::pair<int, double>> values = solver.system().constrained_dofs;
  for (auto& [dof, val] : values) {
    Vec2 v = data(dm.node_position(dof / 2));
    val = dof % 2 == 0 ? v.x : v.y;
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dm.num_saddle_dofs());
  if (body_force) rhs.head(dm.num_velocity_dofs()) += assemble_volume_load(dm, body_force);
  if (outflow_traction)
    rhs.head(dm.num_velocity_dofs()) += assemble_outflow_traction(dm, outflow_traction);
  Eigen::VectorXd x = solver.factorization().solve_with_values(rhs, values);

  StateSolution sol{Field(solver.dofmap_ptr(), Field::Kind::VectorQuadratic),
                    Field(solver.dofmap_ptr(), Field::Kind::ScalarLinear),
                    interpolate_vector(solver.dofmap_ptr(), data)};
  sol.u.coeffs = x.head(dm.num_velocity_dofs());
  sol.p.coeffs = x.tail(dm.num_pressure_dofs());
  return sol;
}

ConvergenceRow manufactured_errors(const ManufacturedCase& mc, const StateSolution& state) {
  const DofMap& dm = *state.u.dofmap;
  const Mesh& mesh = dm.mesh();
  double eu2 = 0.0, ep2 = 0.0, uu2 = 0.0, pp2 = 0.0;
  const auto& rule = tri_rule_deg5();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    ElementGeometry geo(mesh, t);
    const auto& nodes = dm.triangle_nodes(t);
    const auto& tri = mesh.triangles[t];
    for (const QPoint& q : rule) {
      double w = q.w * geo.area;
      Vec2 x = geo.map(q.xi, q.eta);
      Vec2 uh = field_value(state.u, nodes, q.xi, q.eta);
      Grad2 gh = field_gradient(state.u, geo, nodes, q.xi, q.eta);
      auto psi = p1_values(q.xi, q.eta);
      double ph = 0.0;
      for (int i = 0; i < 3; ++i) ph += psi[i] * state.p.coeffs[tri[i]];

      Vec2 ue = mc.velocity(x);
      Vec2 g0 = mc.velocity_grad_row0(x);
      Vec2 g1 = mc.velocity_grad_row1(x);
      double pe = mc.pressure(x);

      eu2 += w * (norm2(uh - ue) + norm2(Vec2{gh.g[0][0], gh.g[0][1]} - g0) +
                  norm2(Vec2{gh.g[1][0], gh.g[1][1]} - g1));
      ep2 += w * (ph - pe) * (ph - pe);
      uu2 += w * (norm2(uh) + gh.g[0][0] * gh.g[0][0] + gh.g[0][1] * gh.g[0][1] +
                  gh.g[1][0] * gh.g[1][0] + gh.g[1][1] * gh.g[1][1]);
      pp2 += w * ph * ph;
    }
  }
  ConvergenceRow row;
  row.err_u_h1 = std::sqrt(eu2);
  row.err_p_l2 = std::sqrt(ep2);
  row.energy = std::sqrt(uu2) + std::sqrt(pp2);
  return row;
}

std::vector<ConvergenceRow> manufactured_convergence(int levels, int n0, double nu) {
  ManufacturedCase mc = manufactured_trig(nu);
  std::vector<ConvergenceRow> rows;
  for (int l = 0; l < levels; ++l) {
    int n = n0 << l;
    auto mesh = std::make_shared<Mesh>(build_structured_rectangle({0, 0, 1, 1}, n, n));
    StokesSolver solver(mesh, nu);
    StateSolution st = solve_dirichlet(solver, mc.velocity, mc.body_force, mc.outflow_traction);
    ConvergenceRow row = manufactured_errors(mc, st);
    row.h = 1.0 / n;
    rows.push_back(row);
  }
  return rows;
}

bool ValidationReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

namespace {

ValidationCheck check_h_table() {
  ValidationCheck c{"h-function table and derivatives", true, ""};
  std::ostringstream detail;
  auto expect = [&](double got, double want, double tol, const char* what) {
    if (std::abs(got - want) > tol) {
      c.passed = false;
      detail << what << ": got " << got << ", want " << want << "; ";
    }
  };
  expect(h_eval(0.0), 0.0, 0.0, "h(0)");
  expect(h_eval(-3.0), 0.0, 0.0, "h(-3)");
  expect(h_eval(1.0), 0.5, 1e-15, "h(1)");
  expect(h_eval(2.0), 1.6, 1e-15, "h(2)");
  for (double t : {0.3, 1.0, 2.5, -1.5}) {
    double d = 1e-6 * std::max(1.0, std::abs(t));
    if (std::abs(t) < 3.0 * d) continue;
    double fd1 = (h_eval(t + d) - h_eval(t - d)) / (2 * d);
    double fd2 = (h_prime(t + d) - h_prime(t - d)) / (2 * d);
    expect(h_prime(t), fd1, 1e-6 * std::max(1.0, std::abs(fd1)), "h' vs FD");
    expect(h_second(t), fd2, 1e-6 * std::max(1.0, std::abs(fd2)), "h'' vs FD");
  }
  c.detail = c.passed ? "exact table and FD-consistent derivatives" : detail.str();
  return c;
}

ValidationCheck check_poiseuille() {
  ValidationCheck c{"exact Poiseuille reproduction", true, ""};
  auto mesh = std::make_shared<Mesh>(build_structured_rectangle({0.0, -0.5, 2.0, 0.5}, 40, 20));
  const double nu = 0.01;
  StokesSolver solver(mesh, nu);
  StateSolution st = solver.solve_state(poiseuille_inflow);
  const DofMap& dm = solver.dofmap();
  double worst_u = 0.0, worst_p = 0.0;
  for (int n = 0; n < dm.num_velocity_nodes(); ++n) {
    Vec2 d = st.u.node_value(n) - poiseuille_inflow(dm.node_position(n));
    worst_u = std::max({worst_u, std::abs(d.x), std::abs(d.y)});
  }
  for (int v = 0; v < mesh->num_vertices(); ++v) {
    double pe = -2.4 * nu * (mesh->vertices[v].x - 2.0);
    worst_p = std::max(worst_p, std::abs(st.p.coeffs[v] - pe));
  }
  std::ostringstream detail;
  detail << "max |u - g| = " << worst_u << ", max |p - p_exact| = " << worst_p;
  c.detail = detail.str();
  c.passed = worst_u <= 1e-8 && worst_p <= 1e-8;
  return c;
}

ValidationCheck check_manufactured() {
  ValidationCheck c{"manufactured-solution convergence", true, ""};
  auto rows = manufactured_convergence(3, 8);
  std::ostringstream detail;
  bool ok = true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double ou = std::log2(rows[i - 1].err_u_h1 / rows[i].err_u_h1);
    double op = std::log2(rows[i - 1].err_p_l2 / rows[i].err_p_l2);
    detail << "level " << i << ": H1(u) order " << ou << ", L2(p) order " << op << "; ";
    if (ou < 1.7 || ou > 2.3 || op < 1.7 || op > 2.3) ok = false;
    if (rows[i].energy > 10.0 * rows[i - 1].energy) ok = false;
  }
  c.passed = ok;
  c.detail = detail.str();
  return c;
}

Field radial_bump_theta(const StokesSolver& solver, const ChannelGeometry& geom,
                        double width) {
  const Vec2 c = geom.obstacle_center;
  const double r = geom.obstacle_radius;
  auto bump = [=](const Vec2& x) {
    double d = std::max(0.0, dist(x, c) - r);
    if (d >= width) return Vec2{0.0, 0.0};
    double s = d / width;
    double eta = std::exp(1.0 - 1.0 / (1.0 - s * s));
    return eta * normalized(x - c);
  };
  Field theta = interpolate_vector(solver.dofmap_ptr(), bump);
  for (Tag t : {Tag::IN, Tag::WALL, Tag::OUT})
    for (int n : solver.dofmap().boundary_nodes(t)) theta.set_node_value(n, {0, 0});
  return theta;
}

ValidationCheck check_shape_derivative() {
  ValidationCheck c{"finite-difference shape derivative", true, ""};
  ChannelGeometry geom;
  Mesh mesh = build_channel_mesh(geom, 1.0 / 35.0, 1.0 / 22.0);
  auto mesh_ptr = std::make_shared<Mesh>(mesh);
  const double nu = 0.01;
  FunctionalParams params;
  params.gamma1 = 1.0;
  params.gamma2 = 0.0;
  params.alpha = 5.0;

  StokesSolver solver(mesh_ptr, nu);
  Field theta = radial_bump_theta(solver, geom, 0.12);
  std::vector<double> steps{4e-3, 2e-3, 1e-3, 1e-4};
  ShapeDerivativeReport rep =
      validate_shape_derivative(mesh, params, nu, poiseuille_inflow, theta, steps, 2.5e-3);

  // the nu factor on dv/dn: dropping it (adjoint scaled by 1/nu) must degrade
  // the match measurably
  StateSolution st = solver.solve_state(poiseuille_inflow);
  AdjointSolution adj = solver.solve_adjoint(st, params.gamma1, params.gamma2);
  AdjointSolution adj_nonu = adj;
  adj_nonu.v.coeffs = adj.v.coeffs / nu;
  Field N = extend_normal(solver.dofmap_ptr(), 2.5e-3);
  BoundaryScalar kappa = curvature(N);
  BoundaryFrame frame = boundary_frame(solver.dofmap());
  BoundaryScalar gradG_nonu =
      shape_gradient(mesh, st, adj_nonu, kappa, frame, params, nu);
  double formula_nonu = boundary_pairing(gradG_nonu, theta, frame);
  double fd = rep.rows.back().fd;
  double err_with = std::abs(fd - rep.formula);
  double err_without = std::abs(fd - formula_nonu);

  std::ostringstream detail;
  detail << "formula " << rep.formula << ", fd(1e-4) " << fd << ", rel err "
         << rep.worst_relative_error() << "; dropping nu on dv/dn: err " << err_without
         << " vs " << err_with;
  c.detail = detail.str();
  c.passed = rep.worst_relative_error() <= 0.05 && err_with < err_without;
  return c;
}

ValidationCheck check_divfree_deformation() {
  ValidationCheck c{"divergence-free deformation volume check", true, ""};
  ChannelGeometry geom;
  auto mesh = std::make_shared<Mesh>(build_channel_mesh(geom, 1.0 / 30.0, 1.0 / 18.0));
  auto dm = std::make_shared<DofMap>(mesh);
  SaddleSystem sys = assemble(dm, 1.0);
  BoundaryFrame frame = boundary_frame(*dm);
  Field N = extend_normal(dm, 2.5e-3);
  BoundaryScalar kappa = curvature(N);
  Field theta = solve_deformation(sys, kappa, frame, 0.1, 1);

  // discrete divergence residual and total volume rate
  Eigen::VectorXd div_res = sys.B * theta.coeffs;
  double int_div = 0.0;
  const auto& rule = tri_rule_deg4();
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    ElementGeometry geo(*mesh, t);
    for (const QPoint& q : rule) {
      Grad2 g = field_gradient(theta, geo, dm->triangle_nodes(t), q.xi, q.eta);
      int_div += q.w * geo.area * g.div();
    }
  }
  double pairing = boundary_pairing(kappa, theta, frame);
  std::ostringstream detail;
  detail << "max |B theta| = " << div_res.cwiseAbs().maxCoeff() << ", int div theta = "
         << int_div << ", descent pairing = " << pairing;
  c.detail = detail.str();
  double scale = std::max(1.0, theta.coeffs.cwiseAbs().maxCoeff());
  c.passed = div_res.cwiseAbs().maxCoeff() <= 1e-10 * scale &&
             std::abs(int_div) <= 1e-9 * scale && pairing <= 0.0;
  return c;
}

}  // namespace

ValidationReport run_validation(std::ostream& log) {
  ValidationReport report;
  report.checks.push_back(check_h_table());
  report.checks.push_back(check_poiseuille());
  report.checks.push_back(check_manufactured());
  report.checks.push_back(check_shape_derivative());
  report.checks.push_back(check_divfree_deformation());
  for (const auto& c : report.checks)
    log << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
  return report;
}

}  // namespace vortexshape
