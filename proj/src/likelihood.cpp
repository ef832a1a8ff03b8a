#include "genlik/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "genlik/errors.hpp"

namespace genlik {

namespace {

void check_dims(const FiniteJoint& joint, const ObservedMarginal& pY) {
  if (joint.m() != pY.m())
    throw DimensionMismatch("joint has " + std::to_string(joint.m()) +
                            " observed values, pY has " +
                            std::to_string(pY.m()));
}

// (1/beta) ln sum_x p(x,y)^beta for one column, via log-sum-exp over the
// positive entries. Returns -inf for an all-zero column.
double column_power_log_mean(const FiniteJoint& joint, int y, double beta) {
  double max_log = -std::numeric_limits<double>::infinity();
  for (int x = 0; x < joint.n(); ++x) {
    const double p = joint(x, y);
    if (p > 0.0) max_log = std::max(max_log, std::log(p));
  }
  if (!std::isfinite(max_log)) return max_log;
  double sum = 0.0;
  for (int x = 0; x < joint.n(); ++x) {
    const double p = joint(x, y);
    if (p > 0.0) sum += std::exp(beta * (std::log(p) - max_log));
  }
  return max_log + std::log(sum) / beta;
}

}  // namespace

double log_marginal_likelihood(const FiniteJoint& joint,
                               const ObservedMarginal& pY) {
  check_dims(joint, pY);
  double total = 0.0;
  for (int y = 0; y < joint.m(); ++y) {
    if (pY(y) == 0.0) continue;
    double col = 0.0;
    for (int x = 0; x < joint.n(); ++x) col += joint(x, y);
    if (col <= 0.0)
      throw LogOfZero("log_marginal_likelihood: observed value " +
                      std::to_string(y) + " has zero model mass");
    total += pY(y) * std::log(col);
  }
  return total;
}

double log_generalized_likelihood(const FiniteJoint& joint,
                                  const ObservedMarginal& pY, double beta) {
  check_dims(joint, pY);
  if (!(beta > 0.0)) throw NonPositiveBeta("beta must be > 0");
  double total = 0.0;
  for (int y = 0; y < joint.m(); ++y) {
    if (pY(y) == 0.0) continue;
    const double v = column_power_log_mean(joint, y, beta);
    if (!std::isfinite(v))
      throw LogOfZero("log_generalized_likelihood: observed value " +
                      std::to_string(y) + " has zero model mass");
    total += pY(y) * v;
  }
  return total;
}

double h_likelihood(const FiniteJoint& joint, const ObservedMarginal& pY) {
  check_dims(joint, pY);
  double total = 0.0;
  for (int y = 0; y < joint.m(); ++y) {
    if (pY(y) == 0.0) continue;
    double best = 0.0;
    for (int x = 0; x < joint.n(); ++x) best = std::max(best, joint(x, y));
    if (best <= 0.0)
      throw LogOfZero("h_likelihood: observed value " + std::to_string(y) +
                      " has zero model mass");
    total += pY(y) * std::log(best);
  }
  return total;
}

double top_u_likelihood(const FiniteJoint& joint, const ObservedMarginal& pY,
                        int U) {
  check_dims(joint, pY);
  if (U < 1 || U > 3 || U > joint.n())
    throw Error("top_u_likelihood: U must be in {1,2,3} and <= n");
  double total = 0.0;
  std::vector<int> order(static_cast<std::size_t>(joint.n()));
  for (int y = 0; y < joint.m(); ++y) {
    if (pY(y) == 0.0) continue;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return joint(a, y) > joint(b, y);  // stable keeps lowest x first on ties
    });
    for (int u = 0; u < U; ++u) {
      const double p = joint(order[u], y);
      if (p <= 0.0)
        throw LogOfZero("top_u_likelihood: order statistic " +
                        std::to_string(u + 1) + " of observed value " +
                        std::to_string(y) + " is zero");
      total += pY(y) * std::log(p);
    }
  }
  return total / U;
}

ZetaKernel zeta_kernel(const FiniteJoint& joint, double beta) {
  if (!(beta > 0.0)) throw NonPositiveBeta("beta must be > 0");
  ZetaKernel kernel{joint.n(), joint.m(),
                    std::vector<double>(joint.cells().size(), 0.0)};
  for (int y = 0; y < joint.m(); ++y) {
    double max_log = -std::numeric_limits<double>::infinity();
    for (int x = 0; x < joint.n(); ++x)
      if (joint(x, y) > 0.0) max_log = std::max(max_log, std::log(joint(x, y)));
    if (!std::isfinite(max_log))
      throw AllZeroColumn("zeta_kernel: observed value " + std::to_string(y) +
                          " has an all-zero column");
    double norm = 0.0;
    for (int x = 0; x < joint.n(); ++x)
      if (joint(x, y) > 0.0)
        norm += std::exp(beta * (std::log(joint(x, y)) - max_log));
    for (int x = 0; x < joint.n(); ++x) {
      if (joint(x, y) <= 0.0) continue;
      kernel.z[static_cast<std::size_t>(x) * joint.m() + y] =
          std::exp(beta * (std::log(joint(x, y)) - max_log)) / norm;
    }
  }
  return kernel;
}

double beta_derivative(const FiniteJoint& joint, const ObservedMarginal& pY,
                       double beta) {
  check_dims(joint, pY);
  const ZetaKernel kernel = zeta_kernel(joint, beta);
  double total = 0.0;
  for (int y = 0; y < joint.m(); ++y) {
    if (pY(y) == 0.0) continue;
    double neg_entropy = 0.0;
    for (int x = 0; x < joint.n(); ++x) {
      const double z = kernel(x, y);
      if (z > 0.0) neg_entropy += z * std::log(z);
    }
    total += pY(y) * neg_entropy;
  }
  return total / (beta * beta);
}

EntropyProfile entropy_profile(const FiniteJoint& joint) {
  EntropyProfile profile{std::vector<double>(static_cast<std::size_t>(joint.m()), 0.0)};
  for (int y = 0; y < joint.m(); ++y) {
    double col = 0.0;
    for (int x = 0; x < joint.n(); ++x) col += joint(x, y);
    if (col <= 0.0) continue;  // no conditional on a zero column
    double s = 0.0;
    for (int x = 0; x < joint.n(); ++x) {
      const double c = joint(x, y) / col;
      if (c > 0.0) s -= c * std::log(c);
    }
    profile.s[static_cast<std::size_t>(y)] = std::max(0.0, s);
  }
  return profile;
}

double expansion_estimate(const FiniteJoint& joint, const ObservedMarginal& pY,
                          double beta) {
  check_dims(joint, pY);
  const double l1 = log_marginal_likelihood(joint, pY);
  const EntropyProfile profile = entropy_profile(joint);
  double t1 = 0.0;     // average conditional entropy
  double var = 0.0;    // average variance of ln p(x|y)
  for (int y = 0; y < joint.m(); ++y) {
    if (pY(y) == 0.0) continue;
    t1 += pY(y) * profile(y);
    double col = 0.0;
    for (int x = 0; x < joint.n(); ++x) col += joint(x, y);
    if (col <= 0.0) continue;
    for (int x = 0; x < joint.n(); ++x) {
      const double c = joint(x, y) / col;
      if (c <= 0.0) continue;
      const double dev = std::log(c) + profile(y);
      var += pY(y) * c * dev * dev;
    }
  }
  const double eps = 1.0 - beta;
  return l1 + eps * t1 + eps * eps * (t1 + 0.5 * var);
}

// --------- divergences ---------

double hellinger(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size())
    throw DimensionMismatch("hellinger: size mismatch");
  double overlap = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) overlap += std::sqrt(p[i] * q[i]);
  return 1.0 - overlap;
}

double hellinger(const FiniteJoint& p, const FiniteJoint& q) {
  if (p.n() != q.n() || p.m() != q.m())
    throw DimensionMismatch("hellinger: shape mismatch");
  return hellinger(p.cells(), q.cells());
}

double relative_entropy(const std::vector<double>& p,
                        const std::vector<double>& q) {
  if (p.size() != q.size())
    throw DimensionMismatch("relative_entropy: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] <= 0.0)
      throw SupportViolation("relative_entropy: support(p) not within support(q)");
    total += p[i] * std::log(p[i] / q[i]);
  }
  return total;
}

double relative_entropy(const FiniteJoint& p, const FiniteJoint& q) {
  if (p.n() != q.n() || p.m() != q.m())
    throw DimensionMismatch("relative_entropy: shape mismatch");
  return relative_entropy(p.cells(), q.cells());
}

double joint_entropy(const FiniteJoint& joint) {
  double s = 0.0;
  for (double p : joint.cells())
    if (p > 0.0) s -= p * std::log(p);
  return s;
}

}  // namespace genlik
