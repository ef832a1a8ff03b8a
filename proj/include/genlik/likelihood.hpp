#pragma once

#include <vector>

#include "genlik/grid.hpp"

namespace genlik {

// beta-tilted posterior zeta(x|y;beta) = p^beta(x,y) / sum_x p^beta(x,y),
// one column per y; at beta=1 it is the ordinary posterior p(x|y).
struct ZetaKernel {
  int n, m;
  std::vector<double> z;  // row-major like FiniteJoint
  double operator()(int x, int y) const {
    return z[static_cast<std::size_t>(x) * m + y];
  }
};

// Column entropies S_y = -sum_x p(x|y) ln p(x|y), in nats.
struct EntropyProfile {
  std::vector<double> s;
  double operator()(int y) const { return s[static_cast<std::size_t>(y)]; }
};

// sum_y pY(y) ln sum_x p(x,y); terms with pY(y)=0 contribute 0.
double log_marginal_likelihood(const FiniteJoint& joint,
                               const ObservedMarginal& pY);

// (1/beta) sum_y pY(y) ln sum_x p(x,y)^beta with 0^beta = 0. Evaluated
// through a per-column log-sum-exp so it stays exact for beta up to the
// h-likelihood regime (beta ~ 1e4) without underflow.
double log_generalized_likelihood(const FiniteJoint& joint,
                                  const ObservedMarginal& pY, double beta);

// beta -> infinity limit: sum_y pY(y) ln max_x p(x,y).
double h_likelihood(const FiniteJoint& joint, const ObservedMarginal& pY);

// (1/U) sum_{u<=U} sum_y pY(y) ln p(x_[u](y), y) where x_[u](y) is the
// u-th largest column entry; ties broken toward the lowest x index.
double top_u_likelihood(const FiniteJoint& joint, const ObservedMarginal& pY,
                        int U);

ZetaKernel zeta_kernel(const FiniteJoint& joint, double beta);

// dL_beta/dbeta = (1/beta^2) sum_y pY(y) sum_x zeta ln zeta, a weighted
// sum of negative entropies, hence always <= 0.
double beta_derivative(const FiniteJoint& joint, const ObservedMarginal& pY,
                       double beta);

EntropyProfile entropy_profile(const FiniteJoint& joint);

// Second-order expansion of L_beta around beta=1:
//   L1 + (1-beta) T1 + (1-beta)^2 [T1 + V/2]
// with T1 the pY-average of S_y and V the pY-average of the conditional
// log-probability variance.
double expansion_estimate(const FiniteJoint& joint, const ObservedMarginal& pY,
                          double beta);

// --------- divergences ---------

double hellinger(const std::vector<double>& p, const std::vector<double>& q);
double hellinger(const FiniteJoint& p, const FiniteJoint& q);

// sum p ln(p/q); requires support(p) within support(q)
double relative_entropy(const std::vector<double>& p,
                        const std::vector<double>& q);
double relative_entropy(const FiniteJoint& p, const FiniteJoint& q);

double joint_entropy(const FiniteJoint& joint);

}  // namespace genlik
