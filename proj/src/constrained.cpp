#include "genlik/constrained.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "genlik/errors.hpp"
#include "genlik/io.hpp"
#include "genlik/root_find.hpp"

namespace genlik {

namespace {

constexpr double kResidualTol = 1e-10;
constexpr double kSpuriousZone = 1e-6;  // |delta - 1| kept away from the spurious root

void check_dims(const ObservedMarginal& pY, const LinearConstraint& c) {
  if (c.m != pY.m() || c.n < 1 ||
      c.score.size() != static_cast<std::size_t>(c.n) * c.m)
    throw DimensionMismatch("constraint grid does not match pY");
}

double unconstrained_mean(const ObservedMarginal& pY,
                          const LinearConstraint& c) {
  double mean = 0.0;
  for (int y = 0; y < c.m; ++y) {
    double col = 0.0;
    for (int x = 0; x < c.n; ++x) col += c.at(x, y);
    mean += pY(y) * col / c.n;
  }
  return mean;
}

void require_beta_below_one(double beta) {
  if (!(beta > 0.0)) throw NonPositiveBeta("beta must be > 0");
  if (beta >= 1.0)
    throw UnsupportedBeta(
        "this solver requires beta in (0,1); use the sparse/majorization "
        "solver for beta > 1");
}

// Shifted copy of the constraint with min score moved to 1, so the
// fractional powers act on positive brackets only. The solution joint
// is invariant under this shift.
struct ShiftedConstraint {
  std::vector<double> score;
  double target;
  double shift;
};
ShiftedConstraint shift_positive(const LinearConstraint& c) {
  const double lo = *std::min_element(c.score.begin(), c.score.end());
  ShiftedConstraint s;
  s.shift = 1.0 - lo;
  s.score = c.score;
  for (double& v : s.score) v += s.shift;
  s.target = c.target + s.shift;
  return s;
}

// ln sum_x exp(expo * ln w(x,y)) for one column; w entries must be > 0.
double column_power_log_sum(const std::vector<double>& log_w, int n, int m,
                            int y, double expo) {
  double top = -std::numeric_limits<double>::infinity();
  for (int x = 0; x < n; ++x)
    top = std::max(top, expo * log_w[static_cast<std::size_t>(x) * m + y]);
  double sum = 0.0;
  for (int x = 0; x < n; ++x)
    sum += std::exp(expo * log_w[static_cast<std::size_t>(x) * m + y] - top);
  return top + std::log(sum);
}

// p(x,y) = pY(y) w^{1/(beta-1)} / sum_x w^{beta/(beta-1)}, stably in logs.
std::vector<double> build_joint_cells(const ObservedMarginal& pY,
                                      const std::vector<double>& log_w, int n,
                                      int m, double beta) {
  const double a = 1.0 / (beta - 1.0);
  const double b = beta / (beta - 1.0);
  std::vector<double> cells(static_cast<std::size_t>(n) * m, 0.0);
  for (int y = 0; y < m; ++y) {
    if (pY(y) == 0.0) continue;
    const double log_d = column_power_log_sum(log_w, n, m, y, b);
    for (int x = 0; x < n; ++x) {
      const std::size_t idx = static_cast<std::size_t>(x) * m + y;
      cells[idx] = pY(y) * std::exp(a * log_w[idx] - log_d);
    }
  }
  return cells;
}

double average_of(const std::vector<double>& cells,
                  const LinearConstraint& c) {
  double avg = 0.0;
  for (int x = 0; x < c.n; ++x)
    for (int y = 0; y < c.m; ++y)
      avg += c.at(x, y) * cells[static_cast<std::size_t>(x) * c.m + y];
  return avg;
}

}  // namespace

std::pair<double, double> feasible_E_bounds(const ObservedMarginal& pY,
                                            const LinearConstraint& c) {
  check_dims(pY, c);
  double lo = 0.0, hi = 0.0;
  for (int y = 0; y < c.m; ++y) {
    double cmin = c.at(0, y), cmax = c.at(0, y);
    for (int x = 1; x < c.n; ++x) {
      cmin = std::min(cmin, c.at(x, y));
      cmax = std::max(cmax, c.at(x, y));
    }
    lo += pY(y) * cmin;
    hi += pY(y) * cmax;
  }
  return {lo, hi};
}

FiniteJoint solve_known_prior(const ObservedMarginal& pX,
                              const ObservedMarginal& pY, double beta) {
  require_beta_below_one(beta);
  std::vector<double> cells(static_cast<std::size_t>(pX.m()) * pY.m());
  for (int x = 0; x < pX.m(); ++x)
    for (int y = 0; y < pY.m(); ++y)
      cells[static_cast<std::size_t>(x) * pY.m() + y] = pX(x) * pY(y);
  return FiniteJoint(pX.m(), pY.m(), std::move(cells));
}

LagrangeSolution solve_known_average(const ObservedMarginal& pY,
                                     const LinearConstraint& c, double beta) {
  require_beta_below_one(beta);
  check_dims(pY, c);
  const int n = c.n, m = c.m;
  const auto [e_lo, e_hi] = feasible_E_bounds(pY, c);
  const double scale = 1.0 + std::fabs(e_lo) + std::fabs(e_hi);
  const double mean0 = unconstrained_mean(pY, c);
  const ShiftedConstraint sc = shift_positive(c);

  // Target at the unconstrained mean: gamma = 0, delta = 1, uniform
  // conditional. This is the one point where the delta = 1 root is real.
  if (std::fabs(c.target - mean0) <= 1e-12 * scale) {
    std::vector<double> cells(static_cast<std::size_t>(n) * m);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y)
        cells[static_cast<std::size_t>(x) * m + y] = pY(y) / n;
    const double res_avg = std::fabs(average_of(cells, c) - c.target);
    return LagrangeSolution{FiniteJoint(n, m, std::move(cells)),
                            beta,
                            {1.0},
                            0.0,
                            sc.shift,
                            0.0,
                            res_avg};
  }

  if (!(c.target > e_lo + 1e-12 * scale && c.target < e_hi - 1e-12 * scale)) {
    throw Infeasible("target " + fmt17(c.target) +
                     " outside the feasible interval (" + fmt17(e_lo) + ", " +
                     fmt17(e_hi) + ")");
  }

  // h(delta) = sum_y pY N_y/D_y - 1; the delta = 1 root is spurious.
  std::vector<double> log_w(static_cast<std::size_t>(n) * m);
  const double a = 1.0 / (beta - 1.0);
  const double b = beta / (beta - 1.0);
  const auto h = [&](double delta) -> double {
    const double gamma = (1.0 - delta) / sc.target;
    for (std::size_t i = 0; i < log_w.size(); ++i) {
      const double w = delta + gamma * sc.score[i];
      if (!(w > 0.0)) return std::numeric_limits<double>::quiet_NaN();
      log_w[i] = std::log(w);
    }
    double total = 0.0;
    for (int y = 0; y < m; ++y) {
      if (pY(y) == 0.0) continue;
      const double log_n = column_power_log_sum(log_w, n, m, y, a);
      const double log_d = column_power_log_sum(log_w, n, m, y, b);
      total += pY(y) * std::exp(log_n - log_d);
    }
    return total - 1.0;
  };

  // gamma carries the sign of (mean - target); search that side of 1 first
  const int preferred = (mean0 > c.target) ? -1 : +1;
  double root = std::numeric_limits<double>::quiet_NaN();
  std::ostringstream diag;
  for (int side : {preferred, -preferred}) {
    const auto bracket =
        scan_for_sign_change(h, 1.0, kSpuriousZone, 1.35, 1e7, side);
    if (!bracket) {
      diag << " side " << side << ": no sign change;";
      continue;
    }
    const BisectResult r = bisect(h, bracket->lo, bracket->hi, 1e-16, 0.0, 300);
    root = r.root;
    break;
  }
  if (!std::isfinite(root))
    throw RootBracketFailure(
        "solve_known_average: no nonspurious delta root found;" + diag.str() +
        " target " + fmt17(c.target) + " in (" + fmt17(e_lo) + ", " +
        fmt17(e_hi) + ")");

  const double gamma = (1.0 - root) / sc.target;
  for (std::size_t i = 0; i < log_w.size(); ++i)
    log_w[i] = std::log(root + gamma * sc.score[i]);
  std::vector<double> cells = build_joint_cells(pY, log_w, n, m, beta);

  double mass = 0.0;
  for (double v : cells) mass += v;
  const double res_marg = std::fabs(mass - 1.0);
  const double res_avg = std::fabs(average_of(cells, c) - c.target);
  if (res_marg > kResidualTol || res_avg > kResidualTol * scale)
    throw RootBracketFailure(
        "solve_known_average: root found but residuals too large "
        "(marginal " +
        fmt17(res_marg) + ", average " + fmt17(res_avg) + ")");

  return LagrangeSolution{FiniteJoint(n, m, std::move(cells)),
                          beta,
                          {root},
                          gamma,
                          sc.shift,
                          res_marg,
                          res_avg};
}

GibbsSolution gibbs_limit_solution(const ObservedMarginal& pY,
                                   const LinearConstraint& c) {
  check_dims(pY, c);
  const int n = c.n, m = c.m;
  const auto [e_lo, e_hi] = feasible_E_bounds(pY, c);
  const double scale = 1.0 + std::fabs(e_lo) + std::fabs(e_hi);
  const double mean0 = unconstrained_mean(pY, c);

  // average of score under the per-column Gibbs weights, minus target;
  // strictly decreasing in Gamma
  std::vector<double> weights(static_cast<std::size_t>(n));
  const auto build = [&](double big_gamma, std::vector<double>* out_cells) {
    double avg = 0.0;
    for (int y = 0; y < m; ++y) {
      double top = -std::numeric_limits<double>::infinity();
      for (int x = 0; x < n; ++x)
        top = std::max(top, -big_gamma * c.at(x, y));
      double norm = 0.0;
      for (int x = 0; x < n; ++x) {
        weights[static_cast<std::size_t>(x)] =
            std::exp(-big_gamma * c.at(x, y) - top);
        norm += weights[static_cast<std::size_t>(x)];
      }
      for (int x = 0; x < n; ++x) {
        const double p = pY(y) * weights[static_cast<std::size_t>(x)] / norm;
        if (out_cells)
          (*out_cells)[static_cast<std::size_t>(x) * m + y] = p;
        avg += p * c.at(x, y);
      }
    }
    return avg - c.target;
  };

  double big_gamma = 0.0;
  if (std::fabs(c.target - mean0) > 1e-15 * scale) {
    if (!(c.target > e_lo && c.target < e_hi))
      throw Infeasible("target " + fmt17(c.target) +
                       " outside the feasible interval (" + fmt17(e_lo) +
                       ", " + fmt17(e_hi) + ")");
    double span = 1.0;
    const auto f = [&](double g) { return build(g, nullptr); };
    while (std::signbit(f(-span)) == std::signbit(f(span))) {
      span *= 2.0;
      if (span > 1e8)
        throw RootSolveFailure("gibbs_limit_solution: bracket not found");
    }
    big_gamma = bisect(f, -span, span, 1e-16, 1e-13 * scale, 400).root;
  }

  std::vector<double> cells(static_cast<std::size_t>(n) * m, 0.0);
  const double res_avg = std::fabs(build(big_gamma, &cells));
  if (res_avg > 1e-12 * scale)
    throw RootSolveFailure("gibbs_limit_solution: average residual " +
                           fmt17(res_avg));
  return GibbsSolution{FiniteJoint(n, m, std::move(cells)), big_gamma, res_avg};
}

LagrangeSolution solve_two_constraints(const ObservedMarginal& pY,
                                       const LinearConstraint& c, double beta) {
  require_beta_below_one(beta);
  check_dims(pY, c);
  const int n = c.n, m = c.m;
  const auto [e_lo, e_hi] = feasible_E_bounds(pY, c);
  const double scale = 1.0 + std::fabs(e_lo) + std::fabs(e_hi);
  const double mean0 = unconstrained_mean(pY, c);
  const ShiftedConstraint sc = shift_positive(c);
  const double a = 1.0 / (beta - 1.0);
  const double b = beta / (beta - 1.0);

  const auto build_cells = [&](const std::vector<double>& delta, double gamma) {
    std::vector<double> cells(static_cast<std::size_t>(n) * m, 0.0);
    std::vector<double> log_w(static_cast<std::size_t>(n));
    for (int y = 0; y < m; ++y) {
      if (pY(y) == 0.0) continue;
      for (int x = 0; x < n; ++x)
        log_w[static_cast<std::size_t>(x)] = std::log(
            delta[static_cast<std::size_t>(y)] +
            gamma * sc.score[static_cast<std::size_t>(x) * m + y]);
      const double log_d = column_power_log_sum(log_w, n, 1, 0, b);
      for (int x = 0; x < n; ++x)
        cells[static_cast<std::size_t>(x) * m + y] =
            pY(y) *
            std::exp(a * log_w[static_cast<std::size_t>(x)] - log_d);
    }
    return cells;
  };

  if (std::fabs(c.target - mean0) <= 1e-12 * scale) {
    // gamma = 0, delta(y) = 1: uniform conditional satisfies both
    std::vector<double> delta(static_cast<std::size_t>(m), 1.0);
    std::vector<double> cells = build_cells(delta, 0.0);
    const double res_avg = std::fabs(average_of(cells, c) - c.target);
    return LagrangeSolution{FiniteJoint(n, m, std::move(cells)),
                            beta,
                            std::move(delta),
                            0.0,
                            sc.shift,
                            0.0,
                            res_avg};
  }
  if (!(c.target > e_lo + 1e-12 * scale && c.target < e_hi - 1e-12 * scale))
    throw Infeasible("target " + fmt17(c.target) +
                     " outside the feasible interval (" + fmt17(e_lo) + ", " +
                     fmt17(e_hi) + ")");

  // Per-column normalization equation ln N_y - ln D_y = 0 in delta(y);
  // it runs from +inf at the domain edge to -inf at large delta, so the
  // first sign change of the upward scan is taken.
  std::vector<double> log_w(static_cast<std::size_t>(n));
  const auto solve_delta_y = [&](int y, double gamma) -> double {
    double edge = -std::numeric_limits<double>::infinity();
    for (int x = 0; x < n; ++x)
      edge = std::max(edge,
                      -gamma * sc.score[static_cast<std::size_t>(x) * m + y]);
    const auto phi = [&](double delta) -> double {
      for (int x = 0; x < n; ++x) {
        const double w =
            delta + gamma * sc.score[static_cast<std::size_t>(x) * m + y];
        if (!(w > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        log_w[static_cast<std::size_t>(x)] = std::log(w);
      }
      return column_power_log_sum(log_w, n, 1, 0, a) -
             column_power_log_sum(log_w, n, 1, 0, b);
    };
    const double step0 = 1e-9 * (1.0 + std::fabs(edge));
    const auto bracket = scan_for_sign_change(phi, edge, step0, 1.6, 1e9, +1);
    if (!bracket) return std::numeric_limits<double>::quiet_NaN();
    return bisect(phi, bracket->lo, bracket->hi, 1e-16, 0.0, 300).root;
  };

  std::vector<double> delta(static_cast<std::size_t>(m), 1.0);
  const auto psi = [&](double gamma) -> double {
    double weighted = 0.0;
    for (int y = 0; y < m; ++y) {
      if (pY(y) == 0.0) {
        delta[static_cast<std::size_t>(y)] = 1.0;
        continue;
      }
      const double d = solve_delta_y(y, gamma);
      if (!std::isfinite(d)) return std::numeric_limits<double>::quiet_NaN();
      delta[static_cast<std::size_t>(y)] = d;
      weighted += pY(y) * d;
    }
    return gamma * sc.target + weighted - 1.0;
  };

  const int preferred = (mean0 > c.target) ? +1 : -1;  // sign of gamma
  double gamma_root = std::numeric_limits<double>::quiet_NaN();
  std::ostringstream diag;
  for (int side : {preferred, -preferred}) {
    const auto bracket = scan_for_sign_change(psi, 0.0, 1e-6, 1.35, 1e7, side);
    if (!bracket) {
      diag << " side " << side << ": no sign change;";
      continue;
    }
    gamma_root = bisect(psi, bracket->lo, bracket->hi, 1e-16, 0.0, 300).root;
    break;
  }
  if (!std::isfinite(gamma_root))
    throw RootSolveFailure("solve_two_constraints: no gamma root found;" +
                           diag.str());

  psi(gamma_root);  // refresh delta(y) at the root
  std::vector<double> cells = build_cells(delta, gamma_root);

  double res_marg = 0.0;
  std::ostringstream per_y;
  for (int y = 0; y < m; ++y) {
    double col = 0.0;
    for (int x = 0; x < n; ++x) col += cells[static_cast<std::size_t>(x) * m + y];
    const double r = std::fabs(col - pY(y));
    res_marg = std::max(res_marg, r);
    per_y << (y ? "," : "") << fmt17(r);
  }
  const double res_avg = std::fabs(average_of(cells, c) - c.target);
  if (res_marg > kResidualTol || res_avg > kResidualTol * scale)
    throw RootSolveFailure(
        "solve_two_constraints: residuals too large (per-y marginal [" +
        per_y.str() + "], average " + fmt17(res_avg) + ")");

  return LagrangeSolution{FiniteJoint(n, m, std::move(cells)),
                          beta,
                          std::move(delta),
                          gamma_root,
                          sc.shift,
                          res_marg,
                          res_avg};
}

}  // namespace genlik
