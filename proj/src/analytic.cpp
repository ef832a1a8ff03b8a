#include "genlik/analytic.hpp"

#include <cmath>

#include "genlik/errors.hpp"
#include "genlik/root_find.hpp"

namespace genlik {

FiniteJoint discrete_joint(double g, double h) {
  if (g < 0.0 || h < 0.0) throw Error("discrete_joint: g,h must be >= 0");
  const double norm = 4.0 * std::cosh(h) * std::cosh(g);
  std::vector<double> cells(4);
  const double vals[2] = {-1.0, +1.0};
  for (int xi = 0; xi < 2; ++xi)
    for (int yi = 0; yi < 2; ++yi)
      cells[static_cast<std::size_t>(xi) * 2 + yi] =
          std::exp(g * vals[xi] + h * vals[xi] * vals[yi]) / norm;
  return FiniteJoint(2, 2, std::move(cells));
}

double discrete_z(double g, double h) { return std::tanh(h) * std::tanh(g); }

ObservedMarginal discrete_marginal(double z) {
  return ObservedMarginal({0.5 * (1.0 - z), 0.5 * (1.0 + z)});
}

double discrete_lbeta(double g_hat, double h_hat, double z, double beta) {
  if (!(beta > 0.0)) throw NonPositiveBeta("beta must be > 0");
  // cosh is even; fabs keeps the ghat <-> hhat symmetry bit-exact
  const double plus = std::cosh(beta * g_hat + beta * h_hat);
  const double minus = std::cosh(std::fabs(beta * g_hat - beta * h_hat));
  return -std::log(std::cosh(h_hat)) - std::log(std::cosh(g_hat)) +
         (1.0 + z) / (2.0 * beta) * std::log(plus) +
         (1.0 - z) / (2.0 * beta) * std::log(minus);
}

DiscreteSolution discrete_solve(double z, double beta) {
  if (!(z > 0.0 && z < 1.0)) throw Error("discrete_solve: z must be in (0,1)");
  if (!(beta > 0.0)) throw NonPositiveBeta("beta must be > 0");

  DiscreteSolution sol{};
  sol.beta = beta;
  sol.z = z;

  if (beta > 1.0) {
    sol.kind = DiscreteSolutionKind::kDivergedPair;
    sol.g_diverged = true;  // the swapped twin has h_diverged instead
    sol.h_hat = std::atanh(z);
    sol.g_hat = std::atanh(z);  // finite coordinate of the swapped twin
    return sol;
  }
  if (beta == 1.0) {
    sol.kind = DiscreteSolutionKind::kDegenerateManifold;
    return sol;
  }

  // beta < 1: the symmetric stationarity condition is
  //   (1+z)/2 tanh(2 beta g) = tanh(g),
  // with a nonzero root iff (1+z) beta > 1.
  if ((1.0 + z) * beta <= 1.0) {
    sol.kind = DiscreteSolutionKind::kZero;
    return sol;
  }
  const auto gap = [&](double g) {
    return 0.5 * (1.0 + z) * std::tanh(2.0 * beta * g) - std::tanh(g);
  };
  // gap > 0 just above 0 and < 0 once tanh saturates, well before 50
  const BisectResult root = bisect(gap, 1e-12, 50.0, 1e-16, 0.0, 300);
  sol.kind = DiscreteSolutionKind::kSymmetricRoot;
  sol.g_hat = root.root;
  sol.h_hat = root.root;
  sol.residual = std::fabs(gap(root.root));
  return sol;
}

double discrete_overlap(double z, double g_hat, double h_hat, bool g_diverged,
                        bool h_diverged) {
  const double sum =
      (g_diverged || h_diverged) ? 1.0 : std::tanh(std::fabs(g_hat + h_hat));
  // |ghat - hhat| saturates too when exactly one coordinate diverges
  const double diff = (g_diverged != h_diverged)
                          ? 1.0
                          : (g_diverged && h_diverged
                                 ? 0.0
                                 : std::tanh(std::fabs(g_hat - h_hat)));
  return 0.5 * (1.0 + z) * sum + 0.5 * (1.0 - z) * diff;
}

// ===== continuous model =====

namespace {

// (chi ln chi - c ln c) / (chi - c), extended across the removable
// singularity at c = chi by its series.
double log_mean_term(double chi, double c) {
  const double d = c - chi;
  if (std::fabs(d) <= 1e-6 * std::max(chi, c))
    return std::log(chi) + 1.0 + d / (2.0 * chi);
  return (chi * std::log(chi) - c * std::log(c)) / (chi - c);
}

// the chihat-dependent part of L_beta
double chi_objective(double chi_hat, double chi, double beta) {
  return std::log(chi_hat) - (beta + 1.0) / beta * log_mean_term(chi, chi_hat);
}

double best_chi_hat(double chi, double beta) {
  const auto f = [&](double t) { return chi_objective(std::exp(t), chi, beta); };
  const double center = std::log(chi);
  const double t = golden_max(f, center - 10.0, center + 10.0, 1e-13, 400);
  return std::exp(t);
}

}  // namespace

double continuous_lbeta(double g_hat, double h_hat, double chi_true,
                        double beta) {
  if (!(beta > 0.0)) throw NonPositiveBeta("beta must be > 0");
  if (!(g_hat > 0.0 && h_hat > 0.0 && chi_true > 0.0))
    throw Error("continuous_lbeta: parameters must be positive");
  const double chi_hat = g_hat / h_hat;
  // constant term: evaluating the double integral gives ln[Gamma(beta)/beta^beta]/beta
  const double constant = (std::lgamma(beta) - beta * std::log(beta)) / beta;
  return constant + (1.0 - 1.0 / beta) * std::log(h_hat) +
         chi_objective(chi_hat, chi_true, beta);
}

ContinuousSolution continuous_solve(double chi, double beta,
                                    std::optional<double> cap) {
  if (!(beta > 0.0)) throw NonPositiveBeta("beta must be > 0");
  if (!(chi > 0.0)) throw Error("continuous_solve: chi must be positive");
  ContinuousSolution sol{};
  sol.beta = beta;
  sol.chi = chi;
  if (beta == 1.0) {
    sol.status = ContinuousStatus::kUniqueAtBetaOne;
    sol.chi_hat = chi;
    return sol;
  }
  sol.chi_hat = best_chi_hat(chi, beta);
  // The hhat coefficient is (1 - 1/beta): ascent direction is downward
  // for beta < 1 and upward for beta > 1, so an upper cap can only pin
  // the beta > 1 case.
  if (beta > 1.0) {
    if (cap) {
      sol.status = ContinuousStatus::kCapped;
      sol.h_hat = *cap;
    } else {
      sol.status = ContinuousStatus::kDivergesLargeH;
    }
  } else {
    sol.status =
        cap ? ContinuousStatus::kNotSensible : ContinuousStatus::kDivergesSmallH;
  }
  return sol;
}

// ===== maximin demonstration =====

namespace {

// worst-case (over the data parameters) Hellinger overlap factors
double branch_low(double u) {  // min over u -> infinity
  return std::exp(0.5 * u) / std::sqrt(2.0 * std::cosh(u));
}
double branch_high(double u) {  // min at u -> 0
  return std::cosh(0.5 * u) / std::sqrt(std::cosh(u));
}
double v_profile(double v) {
  return std::exp(-0.5 * std::fabs(v)) / std::sqrt(2.0 * std::cosh(v));
}

double pair_factor(double a, double b) {
  return std::cosh(0.5 * (a + b)) / std::sqrt(std::cosh(a) * std::cosh(b));
}

}  // namespace

MaximinReport maximin_demo() {
  MaximinReport report{};
  report.crossover_u = -std::log(std::sqrt(2.0) - 1.0);
  report.crossover_gap =
      std::fabs(branch_low(report.crossover_u) - branch_high(report.crossover_u));

  // v-profile peaks at 0; grid scan over [-5, 5]
  {
    double best_v = -5.0, best = v_profile(-5.0);
    for (double v = -5.0; v <= 5.0; v += 1e-3)
      if (v_profile(v) > best) {
        best = v_profile(v);
        best_v = v;
      }
    report.v_argmax = std::fabs(best_v) < 5e-4 ? 0.0 : best_v;
  }

  // per-observation criterion: the two branches push the estimator to
  // the opposite ends of its range
  {
    double best_u = 0.0, best = branch_high(0.0);
    for (double u = 0.0; u <= 20.0; u += 1e-2)
      if (branch_high(u) > best) {
        best = branch_high(u);
        best_u = u;
      }
    report.u_branch_low_argmax = best_u;
    report.u_branch_high_diverges = branch_low(20.0) > branch_low(10.0);
  }

  // averaged criterion: minimize the weighted pair over a (u, v) grid
  // with |v| = 20 standing in for the infinite limit; the result matches
  // the closed form and carries no utilde information
  {
    const std::vector<double> u_tildes = {0.25, 0.5, 1.0, 2.0, 4.0};
    const std::vector<double> v_tildes = {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
    double worst_err = 0.0;
    double best_v_tilde = v_tildes.front();
    double best_val = -1.0;
    double spread_min = 1e300, spread_max = -1e300;
    for (double vt : v_tildes) {
      double across_u_min = 1e300, across_u_max = -1e300;
      for (double ut : u_tildes) {
        double grid_min = 1e300;
        for (double u = 1e-3; u <= 20.0; u += 0.05) {
          for (double v = -20.0; v <= 20.0; v += 0.05) {
            const double wu = std::cosh(u) / (std::cosh(u) + std::cosh(v));
            const double val =
                wu * pair_factor(u, ut) + (1.0 - wu) * pair_factor(v, vt);
            grid_min = std::min(grid_min, val);
          }
        }
        worst_err = std::max(worst_err, std::fabs(grid_min - v_profile(vt)));
        across_u_min = std::min(across_u_min, grid_min);
        across_u_max = std::max(across_u_max, grid_min);
      }
      if (vt == 0.0) {
        spread_min = across_u_min;
        spread_max = across_u_max;
      }
      if (across_u_min > best_val) {
        best_val = across_u_min;
        best_v_tilde = vt;
      }
    }
    report.avg_match_worst_err = worst_err;
    report.avg_v_argmax = best_v_tilde;
    report.avg_u_spread = spread_max - spread_min;
  }
  return report;
}

}  // namespace genlik
