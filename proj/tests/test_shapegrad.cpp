#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vortexshape/descent.hpp"
#include "vortexshape/shapegrad.hpp"

using namespace vortexshape;

namespace {

const ChannelGeometry kGeom{};

std::shared_ptr<Mesh> channel(double h_min = 1.0 / 50.0, double h_max = 1.0 / 30.0) {
  return std::make_shared<Mesh>(build_channel_mesh(kGeom, h_min, h_max));
}

// ring mesh around a unit square hole inside a 3x3 box
std::shared_ptr<Mesh> square_hole_fixture() {
  Mesh m;
  m.vertices = {{0, 0}, {3, 0}, {3, 3}, {0, 3}, {1, 1}, {2, 1}, {2, 2}, {1, 2}};
  m.triangles = {{0, 1, 5}, {0, 5, 4}, {1, 2, 6}, {1, 6, 5},
                 {2, 3, 7}, {2, 7, 6}, {3, 0, 4}, {3, 4, 7}};
  m.boundary_edges = {{0, 1, Tag::WALL}, {1, 2, Tag::OUT},  {2, 3, Tag::WALL},
                      {3, 0, Tag::IN},   {4, 5, Tag::FREE}, {5, 6, Tag::FREE},
                      {6, 7, Tag::FREE}, {7, 4, Tag::FREE}};
  m.validate();
  return std::make_shared<Mesh>(m);
}

Field radial_bump(std::shared_ptr<const DofMap> dm, double width, double amplitude = 1.0) {
  const Vec2 c = kGeom.obstacle_center;
  const double r = kGeom.obstacle_radius;
  Field theta = interpolate_vector(dm, [=](const Vec2& x) {
    double d = std::max(0.0, dist(x, c) - r);
    if (d >= width) return Vec2{0.0, 0.0};
    double s = d / width;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - s * s)) * normalized(x - c);
  });
  for (Tag t : {Tag::IN, Tag::WALL, Tag::OUT})
    for (int n : dm->boundary_nodes(t)) theta.set_node_value(n, {0, 0});
  return theta;
}

}  // namespace

TEST_CASE("boundary frame on the circle") {
  auto mesh = channel();
  DofMap dm(mesh);
  BoundaryFrame frame = boundary_frame(dm);
  REQUIRE(!frame.nodes.empty());

  const Vec2 c = kGeom.obstacle_center;
  Vec2 flux{0, 0};
  for (std::size_t i = 0; i < frame.nodes.size(); ++i) {
    const Vec2& n = frame.normal[i];
    const Vec2& tau = frame.tangent[i];
    CHECK(norm(n) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm(tau) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(dot(n, tau)) < 1e-12);
    CHECK(cross(tau, n) > 0.0);  // (tau, n) positively oriented

    // outward w.r.t. the fluid = toward the obstacle center
    Vec2 exact = normalized(c - dm.node_position(frame.nodes[i]));
    CHECK(norm(n - exact) < 1e-2);
    flux += n;
  }
  CHECK(norm(flux) / frame.nodes.size() < 1e-2);  // closed loop: normals cancel
}

TEST_CASE("boundary frame on the axis-aligned square hole") {
  auto mesh = square_hole_fixture();
  DofMap dm(mesh);
  BoundaryFrame frame = boundary_frame(dm);
  // midside nodes of the hole edges carry exact +-e1/+-e2 normals (into hole)
  for (std::size_t k = 0; k < mesh->boundary_edges.size(); ++k) {
    const BoundaryEdge& e = mesh->boundary_edges[k];
    if (e.tag != Tag::FREE) continue;
    int mid = dm.boundary_edge_midnode(static_cast<int>(k));
    Vec2 n = frame.normal[frame.index_of(mid)];
    Vec2 p = dm.node_position(mid);
    Vec2 expect = p.y == 1.0   ? Vec2{0, 1}
                  : p.y == 2.0 ? Vec2{0, -1}
                  : p.x == 1.0 ? Vec2{1, 0}
                               : Vec2{-1, 0};
    CHECK(norm(n - expect) < 1e-14);
  }
}

TEST_CASE("normal extension approximates the boundary normal") {
  auto mesh = channel();
  auto dm = std::make_shared<DofMap>(mesh);
  BoundaryFrame frame = boundary_frame(*dm);

  Field N = extend_normal(dm, 1e-3);
  double worst = 0.0;
  for (std::size_t i = 0; i < frame.nodes.size(); ++i)
    worst = std::max(worst, norm(N.node_value(frame.nodes[i]) - frame.normal[i]));
  CHECK(worst <= 0.05);

  // trace norm decreases as the stiffness weight grows
  double prev = free_boundary_l2sq(N);
  for (double eps : {1e-1, 1e1}) {
    Field Ne = extend_normal(dm, eps);
    double cur = free_boundary_l2sq(Ne);
    CHECK(cur < prev);
    prev = cur;
  }

  // linear in the boundary data
  BoundaryFrame doubled = frame;
  for (Vec2& n : doubled.normal) n = 2.0 * n;
  Field N2 = extend_normal(dm, 1e-3, nullptr, &doubled);
  CHECK((N2.coeffs - 2.0 * N.coeffs).cwiseAbs().maxCoeff() <=
        1e-10 * N.coeffs.cwiseAbs().maxCoeff());
}

TEST_CASE("curvature of the initial circle and of straight segments") {
  auto mesh = channel();
  auto dm = std::make_shared<DofMap>(mesh);
  Field N = extend_normal(dm, 2.5e-3);
  BoundaryScalar kappa = curvature(N);

  double mean = 0.0;
  for (double v : kappa.values) mean += v;
  mean /= kappa.values.size();
  CHECK(mean == doctest::Approx(-1.0 / 0.13).epsilon(0.10));

  // straight hole edges: curvature ~ 0 away from the corners of a square hole
  Polyline square;
  const Vec2 c{0.325, 0.0};
  const double half = 0.13;
  const int per_side = 10;
  auto corner = [&](int k) {
    const Vec2 d[4] = {{-half, -half}, {half, -half}, {half, half}, {-half, half}};
    return c + d[k];
  };
  for (int s = 0; s < 4; ++s)
    for (int i = 0; i < per_side; ++i) {
      double t = static_cast<double>(i) / per_side;
      square.push_back(corner(s) + t * (corner((s + 1) % 4) - corner(s)));
    }
  auto sq = std::make_shared<Mesh>(
      build_mesh_with_hole({0.0, -0.5, 2.0, 0.5}, square, 1.0 / 40.0, 1.0 / 25.0));
  auto dmsq = std::make_shared<DofMap>(sq);
  Field Nsq = extend_normal(dmsq, 1e-3);
  BoundaryScalar ksq = curvature(Nsq);
  int checked = 0;
  for (std::size_t i = 0; i < ksq.nodes.size(); ++i) {
    Vec2 p = dmsq->node_position(ksq.nodes[i]);
    double corner_dist = std::numeric_limits<double>::max();
    for (int k = 0; k < 4; ++k) corner_dist = std::min(corner_dist, dist(p, corner(k)));
    if (corner_dist < 0.06) continue;
    CHECK(std::abs(ksq.values[i]) < 1.0);  // vs 7.7 on the circle
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("curvature pairing reproduces the perimeter derivative") {
  auto mesh = channel();
  auto dm = std::make_shared<DofMap>(mesh);
  Field N = extend_normal(dm, 2.5e-3);
  BoundaryScalar kappa = curvature(N);
  BoundaryFrame frame = boundary_frame(*dm);
  Field theta = radial_bump(dm, 0.12);

  double formula = boundary_pairing(kappa, theta, frame);
  const double t = 1e-4;
  Mesh plus = apply_deformation(*mesh, theta, t);
  Mesh minus = apply_deformation(*mesh, theta, -t);
  double fd = (plus.free_perimeter() - minus.free_perimeter()) / (2.0 * t);
  CHECK(formula == doctest::Approx(fd).epsilon(0.05));
}

TEST_CASE("normal derivative of simple fields") {
  auto mesh = channel(1.0 / 30.0, 1.0 / 18.0);
  auto dm = std::make_shared<DofMap>(mesh);
  BoundaryFrame frame = boundary_frame(*dm);

  Field lin = interpolate_vector(dm, [](const Vec2& x) { return Vec2{x.x, 0.0}; });
  std::vector<Vec2> dn = normal_derivative(lin, frame);
  for (std::size_t i = 0; i < frame.nodes.size(); ++i) {
    CHECK(dn[i].x == doctest::Approx(frame.normal[i].x).epsilon(1e-10));
    CHECK(std::abs(dn[i].y) < 1e-12);
  }

  Field cst = interpolate_vector(dm, [](const Vec2&) { return Vec2{0.4, -0.1}; });
  for (const Vec2& v : normal_derivative(cst, frame)) CHECK(norm(v) < 1e-12);
}

TEST_CASE("no-slip state: velocity gradient is rank-one on the free boundary") {
  auto mesh = channel();
  StokesSolver solver(mesh, 0.01);
  StateSolution st = solver.solve_state(poiseuille_inflow);
  BoundaryFrame frame = boundary_frame(solver.dofmap());
  std::vector<Grad2> gu = boundary_gradient(st.u);
  std::vector<Vec2> dnu = normal_derivative(st.u, frame);

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < frame.nodes.size(); ++i) {
    const Vec2& n = frame.normal[i];
    double r[2][2] = {{dnu[i].x * n.x, dnu[i].x * n.y}, {dnu[i].y * n.x, dnu[i].y * n.y}};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        num += (gu[i].g[a][b] - r[a][b]) * (gu[i].g[a][b] - r[a][b]);
        den += gu[i].g[a][b] * gu[i].g[a][b];
      }
  }
  CHECK(std::sqrt(num / den) <= 0.10);
}

TEST_CASE("shape gradient: perimeter-only limits and linearity") {
  auto mesh = channel(1.0 / 30.0, 1.0 / 18.0);
  StokesSolver solver(mesh, 0.01);
  auto dm = solver.dofmap_ptr();
  Field N = extend_normal(dm, 2.5e-3);
  BoundaryScalar kappa = curvature(N);
  BoundaryFrame frame = boundary_frame(*dm);

  SUBCASE("zero flow reduces grad G to alpha kappa") {
    StateSolution st = solver.solve_state([](const Vec2&) { return Vec2{0, 0}; });
    AdjointSolution adj = solver.solve_adjoint(st, 1.0, 1.0);
    FunctionalParams p{1.0, 1.0, 6.0, 0, 0, 0};
    BoundaryScalar g = shape_gradient(*mesh, st, adj, kappa, frame, p, 0.01);
    for (std::size_t i = 0; i < g.values.size(); ++i)
      CHECK(g.values[i] == doctest::Approx(6.0 * kappa.values[i]).epsilon(1e-10));
  }

  SUBCASE("gamma1 = gamma2 = 0 reduces grad G to alpha kappa for any state") {
    StateSolution st = solver.solve_state(poiseuille_inflow);
    AdjointSolution adj = solver.solve_adjoint(st, 0.0, 0.0);
    FunctionalParams p{0.0, 0.0, 2.5, 0, 0, 0};
    BoundaryScalar g = shape_gradient(*mesh, st, adj, kappa, frame, p, 0.01);
    for (std::size_t i = 0; i < g.values.size(); ++i)
      CHECK(g.values[i] == doctest::Approx(2.5 * kappa.values[i]).epsilon(1e-10));
  }

  SUBCASE("termwise additivity over (gamma1, gamma2)") {
    StateSolution st = solver.solve_state(poiseuille_inflow);
    AdjointSolution adj_a = solver.solve_adjoint(st, 0.9, 0.0);
    AdjointSolution adj_b = solver.solve_adjoint(st, 0.0, 1.8);
    AdjointSolution adj_ab = solver.solve_adjoint(st, 0.9, 1.8);
    const double alpha = 6.0, nu = 0.01;
    BoundaryScalar ga =
        shape_gradient(*mesh, st, adj_a, kappa, frame, {0.9, 0.0, alpha, 0, 0, 0}, nu);
    BoundaryScalar gb =
        shape_gradient(*mesh, st, adj_b, kappa, frame, {0.0, 1.8, alpha, 0, 0, 0}, nu);
    BoundaryScalar gab =
        shape_gradient(*mesh, st, adj_ab, kappa, frame, {0.9, 1.8, alpha, 0, 0, 0}, nu);
    double scale = 0.0;
    for (double v : gab.values) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < gab.values.size(); ++i) {
      double sum_minus = ga.values[i] + gb.values[i] - gab.values[i];
      CHECK(std::abs(sum_minus - alpha * kappa.values[i]) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("lagrangian gradient shift") {
  BoundaryScalar g;
  g.nodes = {0, 1, 2};
  g.values = {1.0, -2.0, 0.5};
  BoundaryScalar l0 = lagrangian_gradient(g, 0.0, 0.0, 1.9, 1.9);
  for (std::size_t i = 0; i < g.values.size(); ++i) CHECK(l0.values[i] == g.values[i]);

  BoundaryScalar l1 = lagrangian_gradient(g, 20.0, 0.0, 1.9, 1.9);
  for (std::size_t i = 0; i < g.values.size(); ++i)
    CHECK(l1.values[i] == doctest::Approx(g.values[i] - 20.0));

  BoundaryScalar l2 = lagrangian_gradient(g, 20.0, 1e-4, 1.95, 1.94);
  for (std::size_t i = 0; i < g.values.size(); ++i)
    CHECK(l2.values[i] == doctest::Approx(g.values[i] - 20.0 + 1e-6).epsilon(1e-12));

  CHECK_THROWS_AS(lagrangian_gradient(g, 1.0, 1.0, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("orientation consistency at perimeter-only parameters") {
  auto mesh = channel(1.0 / 30.0, 1.0 / 18.0);
  StokesSolver solver(mesh, 0.01);
  auto dm = solver.dofmap_ptr();
  BoundaryFrame frame = boundary_frame(*dm);
  Field N = extend_normal(dm, 2.5e-3);
  BoundaryScalar kappa = curvature(N);
  Field theta = radial_bump(dm, 0.1);

  StateSolution st = solver.solve_state([](const Vec2&) { return Vec2{0, 0}; });
  AdjointSolution adj = solver.solve_adjoint(st, 0.0, 0.0);
  FunctionalParams p{0.0, 0.0, 1.0, 0, 0, 0};

  BoundaryScalar g = shape_gradient(*mesh, st, adj, kappa, frame, p, 0.01);
  double pairing = boundary_pairing(g, theta, frame);

  // flip the stored orientation: normals, tangents, curvature sign
  BoundaryFrame flipped = frame;
  for (std::size_t i = 0; i < flipped.normal.size(); ++i) {
    flipped.normal[i] = -1.0 * flipped.normal[i];
    flipped.tangent[i] = -1.0 * flipped.tangent[i];
  }
  Field Nf = extend_normal(dm, 2.5e-3, nullptr, &flipped);
  BoundaryScalar kf = curvature(Nf);
  for (std::size_t i = 0; i < kf.values.size(); ++i)
    CHECK(kf.values[i] == doctest::Approx(-kappa.values[i]).epsilon(1e-9));
  BoundaryScalar gf = shape_gradient(*mesh, st, adj, kf, flipped, p, 0.01);
  double pairing_f = boundary_pairing(gf, theta, flipped);
  CHECK(pairing_f == doctest::Approx(pairing).epsilon(1e-9));
}

TEST_CASE("shape-derivative oracle: perimeter-only and trivial theta") {
  auto mesh = channel(1.0 / 30.0, 1.0 / 18.0);
  auto dm = std::make_shared<DofMap>(mesh);

  SUBCASE("theta = 0 gives a zero derivative and zero FD") {
    Field theta(dm, Field::Kind::VectorQuadratic);
    FunctionalParams p{0.0, 0.0, 1.0, 0, 0, 0};
    ShapeDerivativeReport rep = validate_shape_derivative(
        *mesh, p, 0.01, [](const Vec2&) { return Vec2{0, 0}; }, theta, {1e-3}, 2.5e-3);
    CHECK(rep.formula == doctest::Approx(0.0));
    CHECK(rep.rows[0].fd == doctest::Approx(0.0));
  }

  SUBCASE("radial theta, perimeter-only objective matches the kappa pairing") {
    Field theta = radial_bump(dm, 0.12);
    FunctionalParams p{0.0, 0.0, 1.0, 0, 0, 0};
    ShapeDerivativeReport rep = validate_shape_derivative(
        *mesh, p, 0.01, [](const Vec2&) { return Vec2{0, 0}; }, theta,
        {4e-3, 2e-3, 1e-3}, 2.5e-3);
    CHECK(rep.worst_relative_error() <= 0.05);
  }
}
