#pragma once

#include <utility>
#include <vector>

#include "genlik/grid.hpp"

namespace genlik {

// A linear prior constraint sum_{xy} score(x,y) p(x,y) = target.
struct LinearConstraint {
  int n, m;
  std::vector<double> score;  // row-major, like FiniteJoint
  double target;

  double at(int x, int y) const {
    return score[static_cast<std::size_t>(x) * m + y];
  }
};

// Achievable range of the constraint average when pY is fixed:
// (sum_y pY min_x score, sum_y pY max_x score).
std::pair<double, double> feasible_E_bounds(const ObservedMarginal& pY,
                                            const LinearConstraint& constraint);

// Known prior p(x): the maximizer of L_beta (beta < 1) is the product
// joint p(x) p(y), by concavity.
FiniteJoint solve_known_prior(const ObservedMarginal& pX,
                              const ObservedMarginal& pY, double beta);

struct LagrangeSolution {
  FiniteJoint joint;
  double beta;
  std::vector<double> delta;  // size 1 (known-average) or m (two-constraint)
  double gamma;
  double shift;  // scores are solved with score - min + 1; delta/gamma live there
  double residual_marginal;  // |sum p - 1|, or max_y |column sum - pY(y)|
  double residual_average;   // |sum score p - target| on the unshifted score
};

// Known linear average: p(x,y) = pY(y) w^{1/(beta-1)} / sum_x w^{beta/(beta-1)}
// with w = delta + gamma score, gamma = (1-delta)/target; delta is the
// nonspurious root (delta != 1) of the marginal-normalization equation,
// located by a geometric bracket scan on both sides of 1 and bisection.
// Only beta in (0,1); beta > 1 problems belong to the sparse solver.
LagrangeSolution solve_known_average(const ObservedMarginal& pY,
                                     const LinearConstraint& constraint,
                                     double beta);

// beta -> 1- limit of the known-average solution: per-column Gibbs
// weights exp(-Gamma score) with Gamma solved so the average holds; the
// observed marginal is reproduced exactly.
struct GibbsSolution {
  FiniteJoint joint;
  double gamma_big;
  double residual_average;
};
GibbsSolution gibbs_limit_solution(const ObservedMarginal& pY,
                                   const LinearConstraint& constraint);

// Marginal + average constraints together: per-column multipliers
// delta(y) solved inside an outer scalar solve for gamma != 0.
LagrangeSolution solve_two_constraints(const ObservedMarginal& pY,
                                       const LinearConstraint& constraint,
                                       double beta);

}  // namespace genlik
