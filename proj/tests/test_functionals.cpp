#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vortexshape/functionals.hpp"

using namespace vortexshape;

namespace {

std::shared_ptr<Mesh> reference_channel(double h_min = 1.0 / 25.0, double h_max = 1.0 / 15.0) {
  return std::make_shared<Mesh>(build_channel_mesh(ChannelGeometry{}, h_min, h_max));
}

StateSolution fake_state(std::shared_ptr<const DofMap> dm,
                         const std::function<Vec2(const Vec2&)>& u_expr) {
  StateSolution st{interpolate_vector(dm, u_expr), Field(dm, Field::Kind::ScalarLinear),
                   Field(dm, Field::Kind::VectorQuadratic)};
  return st;
}

}  // namespace

TEST_CASE("h function: table, derivatives, branch") {
  CHECK(h_eval(0.0) == 0.0);
  CHECK(h_eval(-3.0) == 0.0);
  CHECK(h_eval(1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(h_eval(2.0) == doctest::Approx(1.6).epsilon(1e-15));
  CHECK(h_prime(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(h_second(1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(h_prime(-2.0) == 0.0);
  CHECK(h_second(-2.0) == 0.0);

  for (double t : {0.25, 0.9, 1.7, 3.2}) {
    double d = 1e-6;
    double fd1 = (h_eval(t + d) - h_eval(t - d)) / (2 * d);
    double fd2 = (h_prime(t + d) - h_prime(t - d)) / (2 * d);
    CHECK(h_prime(t) == doctest::Approx(fd1).epsilon(1e-6));
    CHECK(h_second(t) == doctest::Approx(fd2).epsilon(1e-6));
  }
  // h stays below t for t > 0 (the L1 bound on j2 rests on this)
  for (double t : {0.1, 0.5, 1.0, 7.0}) CHECK(h_eval(t) <= t);
}

TEST_CASE("breakdown on interpolated fields") {
  auto mesh = reference_channel();
  auto dm = std::make_shared<DofMap>(mesh);
  double area = mesh->total_area();

  SUBCASE("negative determinant contributes nothing to j2") {
    StateSolution st = fake_state(dm, [](const Vec2& x) { return Vec2{x.x, -x.y}; });
    FunctionalParams p{0.0, 1.0, 1.0, 0, 0, 0};
    ObjectiveBreakdown bd = eval_breakdown(*mesh, st, p);
    CHECK(bd.j2 == doctest::Approx(0.0));
  }

  SUBCASE("rigid rotation: j1 = 2 |Omega| at gamma1 = 1") {
    StateSolution st = fake_state(dm, [](const Vec2& x) { return Vec2{-x.y, x.x}; });
    FunctionalParams p{1.0, 0.0, 1.0, 0, 0, 0};
    ObjectiveBreakdown bd = eval_breakdown(*mesh, st, p);
    CHECK(bd.j1 == doctest::Approx(2.0 * area).epsilon(1e-12));
    // and j2 = h(1) |Omega| = 0.5 |Omega| when gamma2 = 1
    FunctionalParams p2{1.0, 1.0, 1.0, 0, 0, 0};
    ObjectiveBreakdown bd2 = eval_breakdown(*mesh, st, p2);
    CHECK(bd2.j2 == doctest::Approx(0.5 * area).epsilon(1e-12));
  }

  SUBCASE("geometry terms: perimeter and volume of the initial shape") {
    // reference resolution: the polygonal chord deficit stays below 1e-3
    auto fine = reference_channel(1.0 / 50.0, 1.0 / 30.0);
    auto dmf = std::make_shared<DofMap>(fine);
    StateSolution st = fake_state(dmf, [](const Vec2&) { return Vec2{0, 0}; });
    FunctionalParams p{1.0, 1.0, 1.0, 0, 0, 0};
    ObjectiveBreakdown bd = eval_breakdown(*fine, st, p);
    CHECK(bd.perimeter == doctest::Approx(2.0 * std::numbers::pi * 0.13).epsilon(1e-3));
    CHECK(bd.volume ==
          doctest::Approx(2.0 - std::numbers::pi * 0.13 * 0.13).epsilon(1e-3));
    CHECK(bd.objective == doctest::Approx(p.alpha * bd.perimeter - bd.j1 - bd.j2));
  }

  SUBCASE("gamma scaling is exact") {
    auto u = [](const Vec2& x) { return Vec2{x.y * x.x, 0.3 * x.x * x.x}; };
    StateSolution st = fake_state(dm, u);
    ObjectiveBreakdown a = eval_breakdown(*mesh, st, {1.0, 1.0, 1.0, 0, 0, 0});
    ObjectiveBreakdown b = eval_breakdown(*mesh, st, {2.0, 2.0, 1.0, 0, 0, 0});
    CHECK(b.j1 == doctest::Approx(2.0 * a.j1).epsilon(1e-15));
    CHECK(b.j2 == doctest::Approx(2.0 * a.j2).epsilon(1e-15));
  }

  SUBCASE("j2 never exceeds the det-grad L1 bound") {
    auto u = [](const Vec2& x) {
      return Vec2{std::sin(x.x) * x.y, x.x * x.x - 0.2 * x.y};
    };
    StateSolution st = fake_state(dm, u);
    FunctionalParams p{0.0, 1.7, 1.0, 0, 0, 0};
    ObjectiveBreakdown bd = eval_breakdown(*mesh, st, p);
    CHECK(bd.j2 <= detgrad_l1(st, p.gamma2) + 1e-14);
  }
}

TEST_CASE("lagrangian assembly") {
  auto mesh = reference_channel();
  auto dm = std::make_shared<DofMap>(mesh);
  StateSolution st = fake_state(dm, [](const Vec2&) { return Vec2{0, 0}; });
  FunctionalParams p{1.0, 0.0, 6.0, 20.0, 1e-4, 0.0};
  p.m = mesh->total_area() - 0.01;  // volume defect F = 0.01
  ObjectiveBreakdown bd = eval_breakdown(*mesh, st, p);
  double F = bd.volume - p.m;
  CHECK(F == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(bd.lagrangian ==
        doctest::Approx(bd.objective - 20.0 * F + 0.5 * 1e-4 * F * F).epsilon(1e-14));
}

TEST_CASE("volume and perimeter invariant under rigid translation") {
  auto mesh = reference_channel();
  Mesh moved = *mesh;
  for (Vec2& v : moved.vertices) v += Vec2{3.7, -1.2};
  CHECK(moved.total_area() == doctest::Approx(mesh->total_area()).epsilon(1e-12));
  CHECK(moved.free_perimeter() == doctest::Approx(mesh->free_perimeter()).epsilon(1e-12));
}

TEST_CASE("mixed split: additivity and zero-flow limits") {
  auto mesh = reference_channel();
  auto dm = std::make_shared<DofMap>(mesh);

  for (int k : {1, 4, 10}) {
    auto u = [](const Vec2& x) { return Vec2{-x.y + 0.1 * x.x * x.x, x.x}; };
    StateSolution st = fake_state(dm, u);
    FunctionalParams p{1.0, static_cast<double>(k), 5.0 + k, 0, 0, 0};
    ObjectiveBreakdown bd = eval_breakdown(*mesh, st, p);
    auto [curl_part, detgrad_part] = mixed_split(bd, k);
    CHECK(curl_part + k * detgrad_part == doctest::Approx(bd.objective).epsilon(1e-12));
  }

  // zero flow: curl part = 5P, detgrad part = P
  StateSolution zero = fake_state(dm, [](const Vec2&) { return Vec2{0, 0}; });
  FunctionalParams p{1.0, 1.0, 6.0, 0, 0, 0};
  ObjectiveBreakdown bd = eval_breakdown(*mesh, zero, p);
  auto [curl_part, detgrad_part] = mixed_split(bd, 1);
  CHECK(curl_part == doctest::Approx(5.0 * bd.perimeter));
  CHECK(detgrad_part == doctest::Approx(bd.perimeter));

  CHECK_THROWS_AS(mixed_split(bd, 0), std::invalid_argument);
  CHECK_THROWS_AS(mixed_split(bd, 11), std::invalid_argument);
  CHECK_THROWS_AS(mixed_split(bd, 2), std::invalid_argument);  // params mismatch
}
