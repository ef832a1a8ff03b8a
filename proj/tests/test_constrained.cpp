#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "genlik/constrained.hpp"
#include "genlik/errors.hpp"
#include "genlik/experiments.hpp"
#include "genlik/likelihood.hpp"
#include "genlik/rng.hpp"

using namespace genlik;

namespace {

ObservedMarginal random_marginal(int m, RngStream& rng) {
  std::vector<double> w(static_cast<std::size_t>(m));
  double total = 0.0;
  for (double& v : w) total += (v = rng.uniform_positive());
  for (double& v : w) v /= total;
  return ObservedMarginal(w);
}

double l_beta_of_cells(const std::vector<double>& cells, int n, int m,
                       const ObservedMarginal& py, double beta) {
  return log_generalized_likelihood(FiniteJoint(n, m, cells), py, beta);
}

// Projected-gradient ascent of L_beta over {p >= 0, sum p = 1,
// sum E p = target}: an oracle for the Lagrange route. The optimum is
// interior for targets away from the feasible edges, so the positivity
// floor rarely engages.
std::vector<double> projected_gradient_oracle(const ObservedMarginal& py,
                                              const LinearConstraint& c,
                                              double beta, RngStream& rng) {
  const int n = c.n, m = c.m;
  const std::size_t cells = static_cast<std::size_t>(n) * m;

  // feasible start from the rejection sampler
  std::vector<double> p;
  {
    const std::vector<double> q = sample_constrained_conditional(py, c, rng);
    p.resize(cells);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y)
        p[static_cast<std::size_t>(x) * m + y] =
            q[static_cast<std::size_t>(x) * m + y] * py(y);
  }

  double a12 = 0.0, a22 = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    a12 += c.score[i];
    a22 += c.score[i] * c.score[i];
  }
  const double a11 = static_cast<double>(cells);
  const double det = a11 * a22 - a12 * a12;

  const auto project_to_null = [&](std::vector<double>& v) {
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
      s1 += v[i];
      s2 += c.score[i] * v[i];
    }
    const double mu1 = (a22 * s1 - a12 * s2) / det;
    const double mu2 = (-a12 * s1 + a11 * s2) / det;
    for (std::size_t i = 0; i < cells; ++i) v[i] -= mu1 + mu2 * c.score[i];
  };
  const auto restore_feasibility = [&]() {
    double s1 = -1.0, s2 = -c.target;
    for (std::size_t i = 0; i < cells; ++i) {
      s1 += p[i];
      s2 += c.score[i] * p[i];
    }
    const double mu1 = (a22 * s1 - a12 * s2) / det;
    const double mu2 = (-a12 * s1 + a11 * s2) / det;
    for (std::size_t i = 0; i < cells; ++i) p[i] -= mu1 + mu2 * c.score[i];
  };

  std::vector<double> grad(cells);
  double step = 0.05;
  double value = l_beta_of_cells(p, n, m, py, beta);
  for (int iter = 0; iter < 400000; ++iter) {
    for (int y = 0; y < m; ++y) {
      double denom = 0.0;
      for (int x = 0; x < n; ++x)
        denom += std::pow(p[static_cast<std::size_t>(x) * m + y], beta);
      for (int x = 0; x < n; ++x)
        grad[static_cast<std::size_t>(x) * m + y] =
            py(y) *
            std::pow(p[static_cast<std::size_t>(x) * m + y], beta - 1.0) /
            denom;
    }
    project_to_null(grad);
    double gnorm = 0.0;
    for (double g : grad) gnorm = std::max(gnorm, std::fabs(g));
    if (gnorm < 1e-10) break;

    bool moved = false;
    for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
      std::vector<double> trial = p;
      bool ok = true;
      for (std::size_t i = 0; i < cells; ++i) {
        trial[i] += step * grad[i];
        if (trial[i] < 1e-13) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      const double trial_value = l_beta_of_cells(trial, n, m, py, beta);
      if (trial_value > value) {
        p = std::move(trial);
        value = trial_value;
        moved = true;
        step *= 2.0;
        break;
      }
    }
    if (!moved) break;
    if (iter % 64 == 0) restore_feasibility();
  }
  restore_feasibility();
  return p;
}

}  // namespace

TEST_CASE("feasible bounds: constant score, caption instance, mean inside") {
  const ObservedMarginal py({0.4, 0.01, 0.5, 0.09});
  LinearConstraint constant{4, 4, std::vector<double>(16, 3.5), 0.0};
  const auto [clo, chi] = feasible_E_bounds(py, constant);
  CHECK(clo == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(chi == doctest::Approx(3.5).epsilon(1e-15));

  LinearConstraint prod{4, 4, builtin_score("product", 4, 4), 0.0};
  const auto [lo, hi] = feasible_E_bounds(py, prod);
  // direct-sum oracle
  double olo = 0.0, ohi = 0.0;
  for (int y = 0; y < 4; ++y) {
    double cmin = 1e300, cmax = -1e300;
    for (int x = 0; x < 4; ++x) {
      cmin = std::min(cmin, prod.at(x, y));
      cmax = std::max(cmax, prod.at(x, y));
    }
    olo += py(y) * cmin;
    ohi += py(y) * cmax;
  }
  CHECK(lo == doctest::Approx(olo).epsilon(1e-14));
  CHECK(hi == doctest::Approx(ohi).epsilon(1e-14));
  CHECK(lo == doctest::Approx(2.28).epsilon(1e-12));
  CHECK(hi == doctest::Approx(9.12).epsilon(1e-12));

  double mean = 0.0;
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) mean += py(y) * prod.at(x, y) / 4.0;
  CHECK(mean >= lo);
  CHECK(mean <= hi);
}

TEST_CASE("known prior: product joint and dominance over random feasible joints") {
  const FiniteJoint u = solve_known_prior(ObservedMarginal::uniform(2),
                                          ObservedMarginal::uniform(2), 0.9);
  for (double cell : u.cells())
    CHECK(cell == doctest::Approx(0.25).epsilon(1e-15));

  const ObservedMarginal px({0.3, 0.7});
  const ObservedMarginal py({0.2, 0.8});
  const FiniteJoint prod = solve_known_prior(px, py, 0.9);
  CHECK(prod(0, 0) == doctest::Approx(0.06).epsilon(1e-14));
  CHECK(prod(0, 1) == doctest::Approx(0.24).epsilon(1e-14));
  CHECK(prod(1, 0) == doctest::Approx(0.14).epsilon(1e-14));
  CHECK(prod(1, 1) == doctest::Approx(0.56).epsilon(1e-14));

  const double best = log_generalized_likelihood(prod, py, 0.9);
  RngStream rng(31, 0);
  for (int trial = 0; trial < 100; ++trial) {
    // random joint with the prior as its hidden marginal
    std::vector<double> cells(4);
    for (int x = 0; x < 2; ++x) {
      const double a = rng.uniform_positive(), b = rng.uniform_positive();
      cells[static_cast<std::size_t>(x) * 2] = px(x) * a / (a + b);
      cells[static_cast<std::size_t>(x) * 2 + 1] = px(x) * b / (a + b);
    }
    CHECK(best >=
          log_generalized_likelihood(FiniteJoint(2, 2, cells), py, 0.9) - 1e-12);
  }
  CHECK_THROWS_AS(solve_known_prior(px, py, 1.5), UnsupportedBeta);
}

TEST_CASE("known average: unconstrained mean gives the uniform conditional") {
  const ObservedMarginal py({0.4, 0.01, 0.5, 0.09});
  LinearConstraint c{4, 4, builtin_score("product", 4, 4), 0.0};
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) c.target += py(y) * c.at(x, y) / 4.0;
  const LagrangeSolution sol = solve_known_average(py, c, 0.95);
  CHECK(sol.gamma == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(sol.delta.size() == 1);
  CHECK(sol.delta[0] == doctest::Approx(1.0).epsilon(1e-15));
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      CHECK(sol.joint(x, y) == doctest::Approx(py(y) / 4.0).epsilon(1e-12));
}

TEST_CASE("known average: residuals, spurious-root exclusion, infeasible target") {
  const ObservedMarginal py({0.4, 0.01, 0.5, 0.09});
  LinearConstraint c{4, 4, builtin_score("product", 4, 4), 4.0};
  const LagrangeSolution sol = solve_known_average(py, c, 0.95);
  CHECK(sol.residual_marginal <= 1e-10);
  CHECK(sol.residual_average <= 1e-9);
  CHECK(std::fabs(sol.delta[0] - 1.0) > 1e-6);
  // bracket positivity at the root
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      CHECK(sol.delta[0] + sol.gamma * (c.at(x, y) + sol.shift) > 0.0);

  c.target = 9.5;  // beyond the upper bound 9.12
  CHECK_THROWS_AS(solve_known_average(py, c, 0.95), Infeasible);
  c.target = 4.0;
  CHECK_THROWS_AS(solve_known_average(py, c, 1.2), UnsupportedBeta);
}

TEST_CASE("known average agrees with the projected-gradient oracle") {
  RngStream rng(33, 0);
  for (int trial = 0; trial < 6; ++trial) {
    const ObservedMarginal py = random_marginal(3, rng);
    LinearConstraint c{3, 3, {}, 0.0};
    c.score.resize(9);
    for (double& s : c.score) s = rng.uniform01() * 4.0 - 1.0;
    const auto [lo, hi] = feasible_E_bounds(py, c);
    c.target = lo + (0.30 + 0.40 * rng.uniform01()) * (hi - lo);
    const LagrangeSolution sol = solve_known_average(py, c, 0.9);
    const std::vector<double> oracle =
        projected_gradient_oracle(py, c, 0.9, rng);
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y)
        CHECK(std::fabs(sol.joint(x, y) -
                        oracle[static_cast<std::size_t>(x) * 3 + y]) <= 1e-5);
  }
}

TEST_CASE("known average: affine invariance of the solved joint") {
  RngStream rng(34, 0);
  const ObservedMarginal py = random_marginal(3, rng);
  LinearConstraint c{3, 3, {}, 0.0};
  c.score.resize(9);
  for (double& s : c.score) s = rng.uniform01() * 3.0;
  const auto [lo, hi] = feasible_E_bounds(py, c);
  c.target = lo + 0.35 * (hi - lo);
  const LagrangeSolution base = solve_known_average(py, c, 0.95);
  for (double a : {2.5, -1.3}) {
    const double b = 0.7;
    LinearConstraint scaled = c;
    for (double& s : scaled.score) s = a * s + b;
    scaled.target = a * c.target + b;
    const LagrangeSolution other = solve_known_average(py, scaled, 0.95);
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y)
        CHECK(std::fabs(base.joint(x, y) - other.joint(x, y)) <= 1e-10);
  }
}

TEST_CASE("known average: y-independent scores factorize the solution") {
  RngStream rng(35, 0);
  const ObservedMarginal py = random_marginal(4, rng);
  LinearConstraint c{3, 4, std::vector<double>(12), 0.0};
  const double fx[3] = {0.3, 1.9, 1.1};
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 4; ++y)
      c.score[static_cast<std::size_t>(x) * 4 + y] = fx[x];
  const auto [lo, hi] = feasible_E_bounds(py, c);
  c.target = lo + 0.6 * (hi - lo);
  const LagrangeSolution sol = solve_known_average(py, c, 0.95);
  // every column carries the same conditional, and the marginal is pY
  for (int y = 0; y < 4; ++y) {
    double colsum = 0.0;
    for (int x = 0; x < 3; ++x) colsum += sol.joint(x, y);
    CHECK(std::fabs(colsum - py(y)) <= 1e-10);
    for (int x = 0; x < 3; ++x)
      CHECK(std::fabs(sol.joint(x, y) / py(y) - sol.joint(x, 0) / py(0)) <=
            1e-10);
  }
}

TEST_CASE("known average: block scores coarse-grain to the same functional form") {
  RngStream rng(36, 0);
  const ObservedMarginal py = random_marginal(4, rng);
  // blocks {y0,y1} and {y2,y3} with per-block scores E_k(x)
  LinearConstraint c{3, 4, std::vector<double>(12), 0.0};
  const double block_score[3][2] = {{0.4, 2.2}, {1.7, 0.9}, {2.9, 1.3}};
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 4; ++y)
      c.score[static_cast<std::size_t>(x) * 4 + y] = block_score[x][y / 2];
  const auto [lo, hi] = feasible_E_bounds(py, c);
  c.target = lo + 0.45 * (hi - lo);
  const LagrangeSolution sol = solve_known_average(py, c, 0.9);

  const double beta = 0.9;
  const double a = 1.0 / (beta - 1.0), b = beta / (beta - 1.0);
  for (int k = 0; k < 2; ++k) {
    const double pm = py(2 * k) + py(2 * k + 1);
    double denom = 0.0;
    for (int x = 0; x < 3; ++x)
      denom += std::pow(
          sol.delta[0] + sol.gamma * (block_score[x][k] + sol.shift), b);
    for (int x = 0; x < 3; ++x) {
      const double block_sum = sol.joint(x, 2 * k) + sol.joint(x, 2 * k + 1);
      const double reconstructed =
          pm *
          std::pow(sol.delta[0] + sol.gamma * (block_score[x][k] + sol.shift),
                   a) /
          denom;
      CHECK(std::fabs(block_sum - reconstructed) <= 1e-10);
    }
  }
}

TEST_CASE("gibbs limit: zero multiplier at the mean, continuation, sign law") {
  RngStream rng(37, 0);
  const ObservedMarginal py = random_marginal(3, rng);
  LinearConstraint c{3, 3, {}, 0.0};
  c.score.resize(9);
  for (double& s : c.score) s = 3.0 * rng.uniform01();
  double mean = 0.0;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) mean += py(y) * c.at(x, y) / 3.0;

  c.target = mean;
  const GibbsSolution at_mean = gibbs_limit_solution(py, c);
  CHECK(at_mean.gamma_big == doctest::Approx(0.0).epsilon(1e-15));
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      CHECK(at_mean.joint(x, y) == doctest::Approx(py(y) / 3.0).epsilon(1e-12));

  // beta -> 1- continuation: the known-average solution at 0.999 is close
  const auto [lo, hi] = feasible_E_bounds(py, c);
  c.target = lo + 0.4 * (hi - lo);
  const GibbsSolution gibbs = gibbs_limit_solution(py, c);
  const LagrangeSolution near_one = solve_known_average(py, c, 0.999);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      CHECK(std::fabs(gibbs.joint(x, y) - near_one.joint(x, y)) <= 1e-3);
  // the marginal is reproduced exactly
  const auto marg = gibbs.joint.marginal_y();
  for (int y = 0; y < 3; ++y) CHECK(std::fabs(marg[y] - py(y)) <= 1e-13);

  // sign( Gamma ) = sign( unconstrained mean - target ) on 100 instances
  for (int trial = 0; trial < 100; ++trial) {
    const ObservedMarginal pyr = random_marginal(3, rng);
    LinearConstraint cr{3, 3, {}, 0.0};
    cr.score.resize(9);
    for (double& s : cr.score) s = 4.0 * rng.uniform01() - 1.0;
    const auto [rlo, rhi] = feasible_E_bounds(pyr, cr);
    cr.target = rlo + (0.1 + 0.8 * rng.uniform01()) * (rhi - rlo);
    double mr = 0.0;
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y) mr += pyr(y) * cr.at(x, y) / 3.0;
    if (std::fabs(mr - cr.target) < 1e-6) continue;
    const GibbsSolution g = gibbs_limit_solution(pyr, cr);
    CHECK(g.gamma_big * (mr - cr.target) > 0.0);
  }
}

TEST_CASE("known average: gamma sign follows the mean-target gap (experiment)") {
  RngStream rng(38, 0);
  int agree = 0, total = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const ObservedMarginal py = random_marginal(3, rng);
    LinearConstraint c{3, 3, {}, 0.0};
    c.score.resize(9);
    for (double& s : c.score) s = 4.0 * rng.uniform01();
    const auto [lo, hi] = feasible_E_bounds(py, c);
    c.target = lo + (0.15 + 0.7 * rng.uniform01()) * (hi - lo);
    double mean = 0.0;
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y) mean += py(y) * c.at(x, y) / 3.0;
    if (std::fabs(mean - c.target) < 1e-6) continue;
    const LagrangeSolution sol = solve_known_average(py, c, 0.95);
    ++total;
    if (sol.gamma * (mean - c.target) > 0.0) ++agree;
  }
  CHECK(agree == total);
}

TEST_CASE("two constraints: trivial mean case and the named 2x2 instance") {
  const ObservedMarginal py({0.5, 0.5});
  LinearConstraint c{2, 2, builtin_score("product", 2, 2), 2.25};
  const LagrangeSolution trivial = solve_two_constraints(py, c, 0.9);
  CHECK(trivial.gamma == doctest::Approx(0.0).epsilon(1e-15));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      CHECK(trivial.joint(x, y) == doctest::Approx(0.25).epsilon(1e-12));

  c.target = 2.4;
  const LagrangeSolution sol = solve_two_constraints(py, c, 0.9);
  CHECK(sol.residual_marginal <= 1e-10);
  CHECK(sol.residual_average <= 1e-9);
  CHECK(sol.delta.size() == 2);

  // dominance over rejection-sampled joints holding both constraints
  const double best = log_generalized_likelihood(sol.joint, py, 0.9);
  RngStream rng(39, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> q = sample_constrained_conditional(py, c, rng);
    std::vector<double> cells(4);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        cells[static_cast<std::size_t>(x) * 2 + y] =
            q[static_cast<std::size_t>(x) * 2 + y] * py(y);
    CHECK(best >=
          log_generalized_likelihood(FiniteJoint(2, 2, cells), py, 0.9) - 1e-12);
  }
}

TEST_CASE("fig1 instance: marginal recovery improves with beta") {
  const ObservedMarginal py({0.4, 0.01, 0.5, 0.09});
  LinearConstraint c{4, 4, builtin_score("product", 4, 4), 0.0};
  for (double frac : {0.2, 0.5, 0.8}) {
    c.target = 2.28 + frac * (9.12 - 2.28);
    double previous = 1e300;
    for (double beta : {0.85, 0.9, 0.95}) {
      const LagrangeSolution sol = solve_known_average(py, c, beta);
      const double dist = hellinger(sol.joint.marginal_y(), py.weights());
      CHECK(dist <= previous + 1e-12);
      previous = dist;
    }
  }
}
