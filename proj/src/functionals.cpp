#include "vortexshape/functionals.hpp"

#include <cmath>
#include <stdexcept>

#include "vortexshape/quadrature.hpp"

namespace vortexshape {

double h_eval(double t) {
  if (t <= 0.0) return 0.0;
  return t * t * t / (t * t + 1.0);
}

double h_prime(double t) {
  if (t <= 0.0) return 0.0;
  double d = t * t + 1.0;
  return (t * t * t * t + 3.0 * t * t) / (d * d);
}

double h_second(double t) {
  if (t <= 0.0) return 0.0;
  double d = t * t + 1.0;
  return 2.0 * t * (3.0 - t * t) / (d * d * d);
}

ObjectiveBreakdown eval_breakdown(const Mesh& mesh, const StateSolution& state,
                                  const FunctionalParams& params) {
  const DofMap& dm = *state.u.dofmap;
  if (&dm.mesh() != &mesh && dm.mesh().num_vertices() != mesh.num_vertices())
    throw std::invalid_argument("eval_breakdown: state not solved on this mesh");

  ObjectiveBreakdown out;
  out.params = params;
  const auto& rule = tri_rule_deg4();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    ElementGeometry geo(mesh, t);
    const auto& nodes = dm.triangle_nodes(t);
    out.volume += geo.area;
    for (const QPoint& q : rule) {
      double w = q.w * geo.area;
      Grad2 gu = field_gradient(state.u, geo, nodes, q.xi, q.eta);
      double curl = gu.curl();
      out.j1 += w * 0.5 * params.gamma1 * curl * curl;
      out.j2 += w * params.gamma2 * h_eval(gu.det());
    }
  }
  out.perimeter = mesh.free_perimeter();
  out.objective = params.alpha * out.perimeter - out.j1 - out.j2;
  double F = out.volume - params.m;
  out.lagrangian = out.objective - params.ell * F + 0.5 * params.b * F * F;
  return out;
}

double detgrad_l1(const StateSolution& state, double gamma2) {
  const DofMap& dm = *state.u.dofmap;
  const Mesh& mesh = dm.mesh();
  double acc = 0.0;
  const auto& rule = tri_rule_deg4();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    ElementGeometry geo(mesh, t);
    const auto& nodes = dm.triangle_nodes(t);
    for (const QPoint& q : rule) {
      Grad2 gu = field_gradient(state.u, geo, nodes, q.xi, q.eta);
      acc += q.w * geo.area * std::abs(gu.det());
    }
  }
  return gamma2 * acc;
}

std::pair<double, double> mixed_split(const ObjectiveBreakdown& bd, int k) {
  if (k < 1 || k > 10)
    throw std::invalid_argument("mixed configuration index must lie in 1..10");
  const FunctionalParams& p = bd.params;
  const double tol = 1e-12;
  if (std::abs(p.gamma1 - 1.0) > tol || std::abs(p.gamma2 - k) > tol ||
      std::abs(p.alpha - (5.0 + k)) > tol)
    throw std::invalid_argument("breakdown was not computed with configuration-k parameters");
  double curl_part = 5.0 * bd.perimeter - bd.j1;
  double detgrad_part = bd.perimeter - bd.j2 / k;
  return {curl_part, detgrad_part};
}

}  // namespace vortexshape
