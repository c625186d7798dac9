#pragma once

#include "vortexshape/flow.hpp"

namespace vortexshape {

// det-grad reward: h(t) = t^3/(t^2+1) for t > 0, else 0. C^2 on all of R.
double h_eval(double t);
double h_prime(double t);
double h_second(double t);

struct FunctionalParams {
  double gamma1 = 1.0;
  double gamma2 = 0.0;
  double alpha = 1.0;
  double ell = 0.0;   // Lagrange multiplier
  double b = 0.0;     // penalty weight
  double m = 0.0;     // target volume
};

struct ObjectiveBreakdown {
  double j1 = 0.0;         // gamma1/2 * int |curl u|^2
  double j2 = 0.0;         // gamma2 * int h(det grad u)
  double perimeter = 0.0;  // length of the FREE boundary
  double volume = 0.0;     // fluid area
  double objective = 0.0;  // alpha*perimeter - j1 - j2
  double lagrangian = 0.0; // objective - ell*F + (b/2)*F^2, F = volume - m
  FunctionalParams params;

  double volume_defect() const { return volume - params.m; }
};

ObjectiveBreakdown eval_breakdown(const Mesh& mesh, const StateSolution& state,
                                  const FunctionalParams& params);

// gamma2 * int |det grad u|, an a-priori upper bound for j2
double detgrad_l1(const StateSolution& state, double gamma2);

// Splits a configuration-k mixed breakdown (alpha = 5+k, gamma1 = 1,
// gamma2 = k) into its curl part 5P - J1 and detgrad part P - J2/k, so that
// curl_part + k * detgrad_part == objective.
std::pair<double, double> mixed_split(const ObjectiveBreakdown& breakdown, int k);

}  // namespace vortexshape
