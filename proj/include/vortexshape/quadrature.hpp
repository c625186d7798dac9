#pragma once

#include <array>

#include "vortexshape/geometry.hpp"

namespace vortexshape {

// Quadrature point in barycentric-free reference coordinates (xi, eta) on the
// unit triangle (0,0)-(1,0)-(0,1); weights sum to 1 and scale by |T|.
struct QPoint {
  double xi, eta, w;
};

// 6-point rule, exact for polynomials of degree 4 (all stiffness/mass terms of
// the quadratic-linear pair).
inline const std::array<QPoint, 6>& tri_rule_deg4() {
  static const std::array<QPoint, 6> r = {{
      {0.108103018168070, 0.445948490915965, 0.223381589678011},
      {0.445948490915965, 0.108103018168070, 0.223381589678011},
      {0.445948490915965, 0.445948490915965, 0.223381589678011},
      {0.816847572980459, 0.091576213509771, 0.109951743655322},
      {0.091576213509771, 0.816847572980459, 0.109951743655322},
      {0.091576213509771, 0.091576213509771, 0.109951743655322},
  }};
  return r;
}

// 7-point degree-5 rule, used for error norms in tests.
inline const std::array<QPoint, 7>& tri_rule_deg5() {
  static const std::array<QPoint, 7> r = {{
      {1.0 / 3.0, 1.0 / 3.0, 0.225},
      {0.797426985353087, 0.101286507323456, 0.125939180544827},
      {0.101286507323456, 0.797426985353087, 0.125939180544827},
      {0.101286507323456, 0.101286507323456, 0.125939180544827},
      {0.059715871789770, 0.470142064105115, 0.132394152788506},
      {0.470142064105115, 0.059715871789770, 0.132394152788506},
      {0.470142064105115, 0.470142064105115, 0.132394152788506},
  }};
  return r;
}

// 3-point Gauss on [0,1], exact to degree 5; weights sum to 1 and scale by |e|.
struct QPoint1 {
  double t, w;
};

inline const std::array<QPoint1, 3>& edge_rule() {
  static const double s = std::sqrt(0.6);
  static const std::array<QPoint1, 3> r = {{
      {0.5 * (1.0 - s), 5.0 / 18.0},
      {0.5, 8.0 / 18.0},
      {0.5 * (1.0 + s), 5.0 / 18.0},
  }};
  return r;
}

// Quadratic Lagrange basis on the unit triangle; node order: vertices 0,1,2
// then midsides of edges (0,1), (1,2), (2,0).
inline std::array<double, 6> p2_values(double xi, double eta) {
  double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
  return {l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
          4 * l0 * l1,       4 * l1 * l2,       4 * l2 * l0};
}

// gradients in reference coordinates, [node] = (d/dxi, d/deta)
inline std::array<Vec2, 6> p2_gradients(double xi, double eta) {
  double l0 = 1.0 - xi - eta;
  return {Vec2{1 - 4 * l0, 1 - 4 * l0},
          Vec2{4 * xi - 1, 0},
          Vec2{0, 4 * eta - 1},
          Vec2{4 * (l0 - xi), -4 * xi},
          Vec2{4 * eta, 4 * xi},
          Vec2{-4 * eta, 4 * (l0 - eta)}};
}

inline std::array<double, 3> p1_values(double xi, double eta) {
  return {1.0 - xi - eta, xi, eta};
}

// quadratic trace basis on an edge, parameter t in [0,1]; order: start, end, mid
inline std::array<double, 3> p2_edge_values(double t) {
  return {(1 - t) * (1 - 2 * t), t * (2 * t - 1), 4 * t * (1 - t)};
}

}  // namespace vortexshape
