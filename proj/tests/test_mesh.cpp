#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "vortexshape/dofmap.hpp"
#include "vortexshape/mesh.hpp"

using namespace vortexshape;

namespace {

ChannelGeometry reference_geometry() { return ChannelGeometry{}; }

Mesh reference_mesh(double h_min = 1.0 / 50.0, double h_max = 1.0 / 30.0) {
  static std::map<std::pair<double, double>, Mesh> cache;
  auto key = std::make_pair(h_min, h_max);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, build_channel_mesh(reference_geometry(), h_min, h_max)).first;
  return it->second;
}

}  // namespace

TEST_CASE("channel geometry invariants") {
  ChannelGeometry geom = reference_geometry();
  CHECK_NOTHROW(geom.validate());
  CHECK(geom.clearance() == doctest::Approx(0.325 - 0.13));

  ChannelGeometry touching = geom;
  touching.obstacle_radius = 0.49;  // overlaps the left wall
  CHECK_THROWS_AS(touching.validate(), std::invalid_argument);
  CHECK_THROWS_AS(build_channel_mesh(touching, 0.02, 0.03), std::invalid_argument);

  ChannelGeometry negative = geom;
  negative.obstacle_radius = -1.0;
  CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
}

TEST_CASE("reference channel mesh: tags, area, quality") {
  Mesh mesh = reference_mesh();
  CHECK_NOTHROW(mesh.validate());
  for (Tag t : {Tag::IN, Tag::WALL, Tag::OUT, Tag::FREE}) CHECK(mesh.has_tag(t));

  // rectangle minus disk, up to the polygonal chord deficit
  double exact = 2.0 - std::numbers::pi * 0.13 * 0.13;
  CHECK(mesh.total_area() == doctest::Approx(exact).epsilon(1e-3));

  // generator output always passes the default quality gate
  QualityReport q = mesh_quality(mesh);
  CHECK_FALSE(q.degenerate);
  CHECK(q.min_angle_deg > 5.0);

  // edge lengths within generator constants of the size bounds
  double h_min = 1.0 / 50.0, h_max = 1.0 / 30.0;
  double lo = 1e9, hi = 0.0;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      double len = dist(mesh.vertices[t[k]], mesh.vertices[t[(k + 1) % 3]]);
      lo = std::min(lo, len);
      hi = std::max(hi, len);
    }
  }
  CHECK(lo > 0.2 * h_min);
  CHECK(hi < 2.5 * h_max);

  // FREE polyline discretizes the circle within chord error of h_min
  Polyline loop = mesh.free_polyline();
  for (const Vec2& p : loop)
    CHECK(std::abs(dist(p, reference_geometry().obstacle_center) - 0.13) < 1e-9);
  double sagitta = 0.13 * (1.0 - std::cos(std::numbers::pi / loop.size()));
  CHECK(sagitta <= h_min);

  CHECK(mesh.free_perimeter() ==
        doctest::Approx(2.0 * std::numbers::pi * 0.13).epsilon(1e-3));
}

TEST_CASE("mesh quality thresholds") {
  Mesh tri;
  tri.vertices = {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2.0}};
  tri.triangles = {{0, 1, 2}};
  tri.boundary_edges = {{0, 1, Tag::WALL}, {1, 2, Tag::OUT}, {2, 0, Tag::IN}};
  QualityReport q = mesh_quality(tri, 5.0, 1e-10);
  CHECK(q.min_angle_deg == doctest::Approx(60.0));
  CHECK_FALSE(q.degenerate);

  Mesh sliver;
  sliver.vertices = {{0, 0}, {1, 0}, {0.5, 1e-9}};
  sliver.triangles = {{0, 1, 2}};
  sliver.boundary_edges = {{0, 1, Tag::WALL}, {1, 2, Tag::OUT}, {2, 0, Tag::IN}};
  QualityReport qa = mesh_quality(sliver, 0.0, 1e-12);
  CHECK(qa.min_area == doctest::Approx(5e-10));
  CHECK_FALSE(qa.degenerate);
  QualityReport qb = mesh_quality(sliver, 0.0, 1e-8);
  CHECK(qb.degenerate);
}

TEST_CASE("apply_deformation: affine in t, contracts enforced") {
  Mesh mesh = reference_mesh(1.0 / 25.0, 1.0 / 15.0);
  auto mesh_ptr = std::make_shared<Mesh>(mesh);
  auto dm = std::make_shared<DofMap>(mesh_ptr);

  const Vec2 c = reference_geometry().obstacle_center;
  Field theta = interpolate_vector(dm, [&](const Vec2& x) {
    double d = dist(x, c) - 0.13;
    double w = 0.1;
    if (d >= w || d < 0) return Vec2{0, 0};
    double s = d / w;
    return std::exp(1.0 - 1.0 / (1.0 - s * s)) * normalized(x - c);
  });
  for (Tag t : {Tag::IN, Tag::WALL, Tag::OUT})
    for (int n : dm->boundary_nodes(t)) theta.set_node_value(n, {0, 0});

  Mesh m0 = apply_deformation(mesh, theta, 0.0);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    CHECK(m0.vertices[v].x == mesh.vertices[v].x);
    CHECK(m0.vertices[v].y == mesh.vertices[v].y);
  }

  // affine in t
  Mesh m1 = apply_deformation(mesh, theta, 0.01);
  Mesh m2 = apply_deformation(mesh, theta, 0.02);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    Vec2 d1 = m1.vertices[v] - mesh.vertices[v];
    Vec2 d2 = m2.vertices[v] - mesh.vertices[v];
    CHECK(d2.x == doctest::Approx(2.0 * d1.x).epsilon(1e-12));
    CHECK(d2.y == doctest::Approx(2.0 * d1.y).epsilon(1e-12));
  }
  CHECK(m1.triangles == mesh.triangles);

  // uniform inward normal motion turns the circle into a smaller circle
  Field inward = interpolate_vector(dm, [&](const Vec2& x) {
    double d = dist(x, c) - 0.13;
    double w = 0.05;
    if (d >= w || d < 0) return Vec2{0, 0};
    return -1.0 * normalized(x - c);  // toward the center
  });
  for (Tag t : {Tag::IN, Tag::WALL, Tag::OUT})
    for (int n : dm->boundary_nodes(t)) inward.set_node_value(n, {0, 0});
  Mesh shrunk = apply_deformation(mesh, inward, 0.01);
  for (const Vec2& p : shrunk.free_polyline())
    CHECK(dist(p, c) == doctest::Approx(0.12).epsilon(1e-9));

  // nonzero theta on a WALL node violates the contract
  Field bad = interpolate_vector(dm, [](const Vec2&) { return Vec2{1.0, 0.0}; });
  CHECK_THROWS_AS(apply_deformation(mesh, bad, 0.01), std::invalid_argument);
}

TEST_CASE("adapt_mesh: free polyline preserved, size control") {
  Mesh mesh = reference_mesh(1.0 / 30.0, 1.0 / 18.0);
  auto mesh_ptr = std::make_shared<Mesh>(mesh);
  auto dm = std::make_shared<DofMap>(mesh_ptr);

  SUBCASE("uniform |u| gives a quasi-uniform mesh between the bounds") {
    Field u = interpolate_vector(dm, [](const Vec2&) { return Vec2{1.0, 0.0}; });
    Mesh adapted = adapt_mesh(mesh, u, 1.0 / 30.0, 1.0 / 18.0);
    CHECK_NOTHROW(adapted.validate());
    // free vertices kept exactly
    Polyline before = mesh.free_polyline();
    Polyline after = adapted.free_polyline();
    REQUIRE(before.size() == after.size());
    CHECK(hausdorff_distance(before, after) < 1e-12);
  }

  SUBCASE("h_min = h_max gives a uniform mesh at that size") {
    Field u = interpolate_vector(dm, [](const Vec2& x) { return Vec2{x.y, -x.x}; });
    Mesh adapted = adapt_mesh(mesh, u, 1.0 / 25.0, 1.0 / 25.0);
    double lo = 1e9, hi = 0.0;
    for (const auto& t : adapted.triangles) {
      for (int k = 0; k < 3; ++k) {
        double len = dist(adapted.vertices[t[k]], adapted.vertices[t[(k + 1) % 3]]);
        lo = std::min(lo, len);
        hi = std::max(hi, len);
      }
    }
    CHECK(lo > 0.2 / 25.0);
    CHECK(hi < 2.5 / 25.0);
  }

  SUBCASE("non-circular (deformed) hole is preserved exactly") {
    const Vec2 c = reference_geometry().obstacle_center;
    Field bump = interpolate_vector(dm, [&](const Vec2& x) {
      double d = dist(x, c) - 0.13;
      double w = 0.08;
      if (d >= w || d < 0) return Vec2{0, 0};
      double s = d / w;
      double phi = std::atan2(x.y - c.y, x.x - c.x);
      return std::exp(1.0 - 1.0 / (1.0 - s * s)) * (1.0 + 0.5 * std::sin(2 * phi)) *
             normalized(x - c);
    });
    for (Tag t : {Tag::IN, Tag::WALL, Tag::OUT})
      for (int n : dm->boundary_nodes(t)) bump.set_node_value(n, {0, 0});
    Mesh deformed = apply_deformation(mesh, bump, 0.02);
    auto dmd = std::make_shared<DofMap>(std::make_shared<Mesh>(deformed));
    Field u = interpolate_vector(dmd, [](const Vec2& x) {
      return Vec2{1.2 * (0.25 - x.y * x.y), 0.0};
    });
    Mesh adapted = adapt_mesh(deformed, u, 1.0 / 30.0, 1.0 / 18.0);
    CHECK_NOTHROW(adapted.validate());
    CHECK(hausdorff_distance(deformed.free_polyline(), adapted.free_polyline()) < 1e-12);
  }

  SUBCASE("Poiseuille-like |u| refines the fast mid-channel region") {
    Field u = interpolate_vector(dm, [](const Vec2& x) {
      return Vec2{1.2 * (0.25 - x.y * x.y), 0.0};
    });
    Mesh adapted = adapt_mesh(mesh, u, 1.0 / 40.0, 1.0 / 15.0);
    // compare median triangle area near the centerline vs near the walls
    std::vector<double> mid, wall;
    for (int t = 0; t < adapted.num_triangles(); ++t) {
      const auto& tr = adapted.triangles[t];
      Vec2 c = (adapted.vertices[tr[0]] + adapted.vertices[tr[1]] + adapted.vertices[tr[2]]) / 3.0;
      if (c.x < 0.9 || c.x > 1.9) continue;  // away from the obstacle and outlet
      if (std::abs(c.y) < 0.1)
        mid.push_back(adapted.triangle_area(t));
      else if (std::abs(c.y) > 0.4)
        wall.push_back(adapted.triangle_area(t));
    }
    REQUIRE(!mid.empty());
    REQUIRE(!wall.empty());
    std::sort(mid.begin(), mid.end());
    std::sort(wall.begin(), wall.end());
    CHECK(mid[mid.size() / 2] < 0.6 * wall[wall.size() / 2]);
  }
}

TEST_CASE("hausdorff distance") {
  Polyline square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(hausdorff_distance(square, square) == doctest::Approx(0.0));

  Polyline shifted;
  for (const Vec2& p : square) shifted.push_back(p + Vec2{0.1, 0.0});
  CHECK(hausdorff_distance(square, shifted) == doctest::Approx(0.1).epsilon(1e-9));

  auto circle = [](double r, int n) {
    Polyline p;
    for (int k = 0; k < n; ++k) {
      double a = 2.0 * std::numbers::pi * k / n;
      p.push_back({r * std::cos(a), r * std::sin(a)});
    }
    return p;
  };
  CHECK(hausdorff_distance(circle(0.13, 64), circle(0.10, 64)) ==
        doctest::Approx(0.03).epsilon(2e-3));

  // symmetry and triangle inequality
  Polyline a = circle(0.5, 17), b = square, c = circle(1.1, 9);
  double ab = hausdorff_distance(a, b), ba = hausdorff_distance(b, a);
  CHECK(ab == doctest::Approx(ba));
  CHECK(hausdorff_distance(a, c) <= ab + hausdorff_distance(b, c) + 1e-12);

  CHECK_THROWS_AS(hausdorff_distance({}, square), std::invalid_argument);
}

TEST_CASE("mesh text roundtrip and format") {
  Mesh mesh = reference_mesh(1.0 / 20.0, 1.0 / 12.0);
  std::stringstream ss;
  write_mesh(ss, mesh);
  std::string header;
  std::getline(ss, header);
  CHECK(header.rfind("vertices ", 0) == 0);
  CHECK(header.find("/ triangles ") != std::string::npos);
  CHECK(header.find("/ boundary ") != std::string::npos);
  ss.seekg(0);
  Mesh back = read_mesh(ss);
  REQUIRE(back.num_vertices() == mesh.num_vertices());
  REQUIRE(back.num_triangles() == mesh.num_triangles());
  CHECK(back.boundary_edges.size() == mesh.boundary_edges.size());
  for (int v = 0; v < mesh.num_vertices(); ++v)
    CHECK(dist(back.vertices[v], mesh.vertices[v]) == 0.0);
}

TEST_CASE("gmsh v2 import with physical-group mapping") {
  // one square split in two triangles, groups: 1=IN, 2=OUT, 3=WALL
  const char* gmsh =
      "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
      "$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n$EndNodes\n"
      "$Elements\n8\n"
      "1 2 2 10 1 1 2 3\n"
      "2 2 2 10 1 1 3 4\n"
      "3 1 2 1 1 4 1\n"
      "4 1 2 2 1 2 3\n"
      "5 1 2 3 1 1 2\n"
      "6 1 2 3 1 3 4\n"
      "7 15 2 0 1 1\n"
      "8 15 2 0 2 2\n"
      "$EndElements\n";
  std::istringstream is(gmsh);
  Mesh mesh = read_gmsh_v2(is, {{1, Tag::IN}, {2, Tag::OUT}, {3, Tag::WALL}});
  CHECK(mesh.num_vertices() == 4);
  CHECK(mesh.num_triangles() == 2);
  CHECK(mesh.boundary_edges.size() == 4);
  CHECK(mesh.has_tag(Tag::IN));
  CHECK(mesh.has_tag(Tag::OUT));
  CHECK(mesh.total_area() == doctest::Approx(1.0));

  std::istringstream is2(gmsh);
  CHECK_THROWS(read_gmsh_v2(is2, {{1, Tag::IN}}));  // unmapped group
}

TEST_CASE("free polyline simplicity detection") {
  Polyline bow = {{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  CHECK_FALSE(polyline_is_simple(bow));
  Polyline square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(polyline_is_simple(square));
}

TEST_CASE("structured rectangle and dof counts") {
  Mesh one;
  one.vertices = {{0, 0}, {1, 0}, {0, 1}};
  one.triangles = {{0, 1, 2}};
  one.boundary_edges = {{0, 1, Tag::WALL}, {1, 2, Tag::OUT}, {2, 0, Tag::IN}};
  DofMap dm1(std::make_shared<Mesh>(one));
  CHECK(dm1.num_velocity_dofs() == 12);  // 2 * (3 vertices + 3 edges)
  CHECK(dm1.num_pressure_dofs() == 3);

  Mesh two = build_structured_rectangle({0, 0, 1, 1}, 1, 1);
  DofMap dm2(std::make_shared<Mesh>(two));
  CHECK(dm2.num_velocity_dofs() == 18);  // 2 * (4 vertices + 5 edges)
  CHECK(dm2.num_pressure_dofs() == 4);

  // Euler formula V - E + T = 1 - holes for the channel (one hole)
  auto mesh = std::make_shared<Mesh>(reference_mesh());
  DofMap dm(mesh);
  CHECK(mesh->num_vertices() - dm.num_edges() + mesh->num_triangles() == 0);
}
