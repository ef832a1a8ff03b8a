#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "genlik/errors.hpp"
#include "genlik/likelihood.hpp"
#include "genlik/rng.hpp"

using namespace genlik;

namespace {

FiniteJoint random_joint(int n, int m, RngStream& rng) {
  std::vector<double> cells(static_cast<std::size_t>(n) * m);
  double total = 0.0;
  for (double& c : cells) total += (c = rng.uniform_positive());
  for (double& c : cells) c /= total;
  return FiniteJoint(n, m, cells);
}

ObservedMarginal random_marginal(int m, RngStream& rng) {
  std::vector<double> w(static_cast<std::size_t>(m));
  double total = 0.0;
  for (double& v : w) total += (v = rng.uniform_positive());
  for (double& v : w) v /= total;
  return ObservedMarginal(w);
}

// brute-force oracles, kept independent of the library path
double oracle_marginal(const FiniteJoint& j, const ObservedMarginal& py) {
  double out = 0.0;
  for (int y = 0; y < j.m(); ++y) {
    double col = 0.0;
    for (int x = 0; x < j.n(); ++x) col += j(x, y);
    if (py(y) > 0.0) out += py(y) * std::log(col);
  }
  return out;
}

double oracle_power_sum(const FiniteJoint& j, const ObservedMarginal& py,
                        double beta) {
  double out = 0.0;
  for (int y = 0; y < j.m(); ++y) {
    double col = 0.0;
    for (int x = 0; x < j.n(); ++x) col += std::pow(j(x, y), beta);
    if (py(y) > 0.0) out += py(y) * std::log(col);
  }
  return out / beta;
}

}  // namespace

TEST_CASE("marginal likelihood closed forms") {
  const FiniteJoint uniform = FiniteJoint::uniform(2, 2);
  const ObservedMarginal py = ObservedMarginal::uniform(2);
  CHECK(log_marginal_likelihood(uniform, py) ==
        doctest::Approx(-std::log(2.0)).epsilon(1e-15));

  // product joint: value is sum_y p(y) ln p(y)
  RngStream rng(11, 0);
  const ObservedMarginal px = random_marginal(3, rng);
  const ObservedMarginal pyr = random_marginal(4, rng);
  std::vector<double> cells;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 4; ++y) cells.push_back(px(x) * pyr(y));
  const FiniteJoint product(3, 4, cells);
  double expect = 0.0;
  for (int y = 0; y < 4; ++y) expect += pyr(y) * std::log(pyr(y));
  CHECK(log_marginal_likelihood(product, pyr) ==
        doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("marginal likelihood agrees with the direct sum on random joints") {
  RngStream rng(12, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const FiniteJoint j = random_joint(3, 3, rng);
    const ObservedMarginal py = random_marginal(3, rng);
    CHECK(std::fabs(log_marginal_likelihood(j, py) - oracle_marginal(j, py)) <=
          1e-14);
  }
}

TEST_CASE("marginal likelihood error paths") {
  const FiniteJoint j(2, 2, {0.5, 0.0, 0.5, 0.0});  // second column empty
  CHECK_THROWS_AS(log_marginal_likelihood(j, ObservedMarginal::uniform(2)),
                  LogOfZero);
  // zero-weight observations make the empty column harmless
  CHECK(log_marginal_likelihood(j, ObservedMarginal({1.0, 0.0})) ==
        doctest::Approx(0.0).epsilon(1e-15));
  CHECK_THROWS_AS(log_marginal_likelihood(j, ObservedMarginal::uniform(3)),
                  DimensionMismatch);
}

TEST_CASE("generalized likelihood: reductions and closed forms") {
  RngStream rng(13, 0);
  const FiniteJoint j = random_joint(4, 4, rng);
  const ObservedMarginal py = random_marginal(4, rng);
  CHECK(std::fabs(log_generalized_likelihood(j, py, 1.0) -
                  log_marginal_likelihood(j, py)) <= 1e-14);

  // uniform n x m: (ln n)/beta - ln(nm)
  for (double beta : {0.5, 0.9, 2.0}) {
    const FiniteJoint u = FiniteJoint::uniform(3, 5);
    CHECK(log_generalized_likelihood(u, ObservedMarginal::uniform(5), beta) ==
          doctest::Approx(std::log(3.0) / beta - std::log(15.0)).epsilon(1e-14));
  }
  CHECK(std::fabs(log_generalized_likelihood(j, py, 0.9) -
                  oracle_power_sum(j, py, 0.9)) <= 1e-13);
  CHECK_THROWS_AS(log_generalized_likelihood(j, py, 0.0), NonPositiveBeta);
  CHECK_THROWS_AS(log_generalized_likelihood(j, py, -1.0), NonPositiveBeta);
}

TEST_CASE("h-likelihood and the large-beta limit") {
  const FiniteJoint u = FiniteJoint::uniform(3, 4);
  CHECK(h_likelihood(u, ObservedMarginal::uniform(4)) ==
        doctest::Approx(-std::log(12.0)).epsilon(1e-14));

  // deterministic conditional: max equals the column sum
  const FiniteJoint det(2, 2, {0.3, 0.0, 0.0, 0.7});
  const ObservedMarginal py({0.4, 0.6});
  CHECK(h_likelihood(det, py) ==
        doctest::Approx(log_marginal_likelihood(det, py)).epsilon(1e-14));

  RngStream rng(14, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const FiniteJoint j = random_joint(3, 3, rng);
    const ObservedMarginal pr = random_marginal(3, rng);
    CHECK(std::fabs(h_likelihood(j, pr) -
                    log_generalized_likelihood(j, pr, 1e4)) <= 1e-3);
  }
}

TEST_CASE("top-U likelihood") {
  RngStream rng(15, 0);
  const FiniteJoint j = random_joint(3, 3, rng);
  const ObservedMarginal py = random_marginal(3, rng);
  CHECK(top_u_likelihood(j, py, 1) ==
        doctest::Approx(h_likelihood(j, py)).epsilon(1e-14));

  const FiniteJoint u = FiniteJoint::uniform(4, 3);
  CHECK(top_u_likelihood(u, ObservedMarginal::uniform(3), 2) ==
        doctest::Approx(-std::log(12.0)).epsilon(1e-14));

  // full-sort oracle for U = 2
  double expect = 0.0;
  for (int y = 0; y < 3; ++y) {
    std::vector<double> col = {j(0, y), j(1, y), j(2, y)};
    std::sort(col.begin(), col.end(), std::greater<double>());
    expect += py(y) * (std::log(col[0]) + std::log(col[1]));
  }
  CHECK(std::fabs(top_u_likelihood(j, py, 2) - expect / 2.0) <= 1e-14);

  // a zero order statistic with weight is an error
  const FiniteJoint sparse(2, 2, {0.5, 0.5, 0.0, 0.0});
  CHECK_THROWS_AS(top_u_likelihood(sparse, ObservedMarginal::uniform(2), 2),
                  LogOfZero);
  CHECK_THROWS_AS(top_u_likelihood(j, py, 4), Error);
}

TEST_CASE("zeta kernel") {
  RngStream rng(16, 0);
  // independence: columns all equal p(x) at beta = 1
  const ObservedMarginal px = random_marginal(3, rng);
  const ObservedMarginal py = random_marginal(3, rng);
  std::vector<double> cells;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) cells.push_back(px(x) * py(y));
  const ZetaKernel indep = zeta_kernel(FiniteJoint(3, 3, cells), 1.0);
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      CHECK(indep(x, y) == doctest::Approx(px(x)).epsilon(1e-13));

  // near-infinite beta picks out the column argmax
  const FiniteJoint j = random_joint(3, 3, rng);
  const ZetaKernel frozen = zeta_kernel(j, 1e4);
  for (int y = 0; y < 3; ++y) {
    int arg = 0;
    for (int x = 1; x < 3; ++x)
      if (j(x, y) > j(arg, y)) arg = x;
    for (int x = 0; x < 3; ++x)
      CHECK(std::fabs(frozen(x, y) - (x == arg ? 1.0 : 0.0)) <= 1e-6);
  }

  // power-normalize oracle at beta = 0.5, plus column normalization
  const ZetaKernel half = zeta_kernel(j, 0.5);
  for (int y = 0; y < 3; ++y) {
    double norm = 0.0;
    for (int x = 0; x < 3; ++x) norm += std::sqrt(j(x, y));
    double colsum = 0.0;
    for (int x = 0; x < 3; ++x) {
      CHECK(std::fabs(half(x, y) - std::sqrt(j(x, y)) / norm) <= 1e-14);
      colsum += half(x, y);
    }
    CHECK(colsum == doctest::Approx(1.0).epsilon(1e-12));
  }

  const FiniteJoint hollow(2, 2, {0.5, 0.0, 0.5, 0.0});
  CHECK_THROWS_AS(zeta_kernel(hollow, 1.0), AllZeroColumn);
}

TEST_CASE("beta derivative: closed forms, sign, finite differences") {
  const FiniteJoint u = FiniteJoint::uniform(4, 3);
  const ObservedMarginal py = ObservedMarginal::uniform(3);
  for (double beta : {0.5, 1.0, 2.0})
    CHECK(beta_derivative(u, py, beta) ==
          doctest::Approx(-std::log(4.0) / (beta * beta)).epsilon(1e-13));

  const FiniteJoint det(2, 2, {0.3, 0.0, 0.0, 0.7});
  CHECK(beta_derivative(det, ObservedMarginal({0.4, 0.6}), 0.8) ==
        doctest::Approx(0.0).epsilon(1e-15));

  RngStream rng(17, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const FiniteJoint j = random_joint(3, 3, rng);
    const ObservedMarginal pr = random_marginal(3, rng);
    const double beta = 0.3 + 1.5 * rng.uniform01();
    const double analytic = beta_derivative(j, pr, beta);
    CHECK(analytic <= 1e-15);
    const double h = 1e-5;
    const double fd = (log_generalized_likelihood(j, pr, beta + h) -
                       log_generalized_likelihood(j, pr, beta - h)) /
                      (2.0 * h);
    CHECK(std::fabs(analytic - fd) <= 1e-6 * std::max(1.0, std::fabs(analytic)));
  }
}

TEST_CASE("entropy profile and the beta~1 expansion") {
  RngStream rng(18, 0);
  const FiniteJoint j = random_joint(3, 3, rng);
  const ObservedMarginal py = random_marginal(3, rng);

  const EntropyProfile profile = entropy_profile(j);
  for (int y = 0; y < 3; ++y) {
    CHECK(profile(y) >= 0.0);
    CHECK(profile(y) <= std::log(3.0) + 1e-12);
  }

  CHECK(expansion_estimate(j, py, 1.0) ==
        doctest::Approx(log_marginal_likelihood(j, py)).epsilon(1e-15));

  const FiniteJoint det(2, 2, {0.3, 0.0, 0.0, 0.7});
  const ObservedMarginal pd({0.4, 0.6});
  for (double beta : {0.5, 0.9, 1.3})
    CHECK(expansion_estimate(det, pd, beta) ==
          doctest::Approx(log_marginal_likelihood(det, pd)).epsilon(1e-14));

  // cubic error decay toward beta = 1
  const auto err = [&](double beta) {
    return std::fabs(expansion_estimate(j, py, beta) -
                     log_generalized_likelihood(j, py, beta));
  };
  const double c_fit = err(0.995) / std::pow(0.005, 3);
  CHECK(err(0.99) <= 1.5 * c_fit * std::pow(0.01, 3));
  CHECK(err(0.98) <= 1.5 * c_fit * std::pow(0.02, 3));
}

TEST_CASE("divergences") {
  RngStream rng(19, 0);
  const ObservedMarginal p = random_marginal(5, rng);
  const ObservedMarginal q = random_marginal(5, rng);
  CHECK(hellinger(p.weights(), p.weights()) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(relative_entropy(p.weights(), p.weights()) ==
        doctest::Approx(0.0).epsilon(1e-14));
  CHECK(hellinger(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 1.0}) ==
        doctest::Approx(1.0).epsilon(1e-15));

  double hl = 0.0, kl = 0.0;
  for (int i = 0; i < 5; ++i) {
    hl += std::sqrt(p(i) * q(i));
    kl += p(i) * std::log(p(i) / q(i));
  }
  CHECK(std::fabs(hellinger(p.weights(), q.weights()) - (1.0 - hl)) <= 1e-14);
  CHECK(std::fabs(relative_entropy(p.weights(), q.weights()) - kl) <= 1e-14);
  CHECK(relative_entropy(p.weights(), q.weights()) >= 0.0);

  CHECK_THROWS_AS(relative_entropy(std::vector<double>{0.5, 0.5},
                                   std::vector<double>{1.0, 0.0}),
                  SupportViolation);

  const FiniteJoint u = FiniteJoint::uniform(2, 3);
  CHECK(joint_entropy(u) == doctest::Approx(std::log(6.0)).epsilon(1e-14));
}

TEST_CASE("beta-monotonicity and concavity on random joints") {
  RngStream rng(20, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const FiniteJoint j1 = random_joint(3, 4, rng);
    const FiniteJoint j2 = random_joint(3, 4, rng);
    const ObservedMarginal py = random_marginal(4, rng);
    const double b1 = 0.2 + rng.uniform01();
    const double b2 = b1 + 0.1 + rng.uniform01();
    CHECK(log_generalized_likelihood(j1, py, b1) >=
          log_generalized_likelihood(j1, py, b2) - 1e-12);

    const double beta = 0.3 + 0.7 * rng.uniform01();  // beta <= 1
    const double lam = 0.05 + 0.9 * rng.uniform01();
    std::vector<double> mix(j1.cells().size());
    for (std::size_t i = 0; i < mix.size(); ++i)
      mix[i] = lam * j1.cells()[i] + (1.0 - lam) * j2.cells()[i];
    const FiniteJoint jm(3, 4, mix);
    CHECK(log_generalized_likelihood(jm, py, beta) >=
          lam * log_generalized_likelihood(j1, py, beta) +
              (1.0 - lam) * log_generalized_likelihood(j2, py, beta) - 1e-12);
  }
}

TEST_CASE("weak conditionality: extending by an experiment label adds ln p(j)") {
  RngStream rng(21, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const FiniteJoint conditional = random_joint(3, 3, rng);  // p(x,y|j)
    const ObservedMarginal py = random_marginal(3, rng);
    const double pj = 0.05 + 0.9 * rng.uniform01();
    const double beta = 0.4 + 1.2 * rng.uniform01();
    // direct evaluation on the scaled block p(x,y,j) = p(x,y|j) p(j)
    double extended = 0.0;
    for (int y = 0; y < 3; ++y) {
      double col = 0.0;
      for (int x = 0; x < 3; ++x)
        col += std::pow(pj * conditional(x, y), beta);
      extended += py(y) * std::log(col);
    }
    extended /= beta;
    const double gap =
        extended - log_generalized_likelihood(conditional, py, beta);
    CHECK(std::fabs(gap - std::log(pj)) <= 1e-12);
  }
}
