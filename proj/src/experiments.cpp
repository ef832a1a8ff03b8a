#include "genlik/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include "genlik/errors.hpp"
#include "genlik/io.hpp"
#include "genlik/likelihood.hpp"

namespace genlik {

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const int workers = std::min(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        if (failed.load(std::memory_order_relaxed)) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
          return;
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

FiniteJoint sample_random_joint(int n, int m, RngStream& rng) {
  if (n < 1 || m < 1) throw DimensionMismatch("sample_random_joint: n,m >= 1");
  std::vector<double> cells(static_cast<std::size_t>(n) * m);
  double total = 0.0;
  for (double& c : cells) {
    c = rng.uniform01();
    total += c;
  }
  if (total <= 0.0) cells[0] = total = 1.0;
  for (double& c : cells) c /= total;
  return FiniteJoint(n, m, std::move(cells));
}

std::vector<double> sample_constrained_conditional(const ObservedMarginal& pY,
                                                   const LinearConstraint& c,
                                                   RngStream& rng,
                                                   int max_tries) {
  const int n = c.n, m = c.m;
  if (pY.m() != m) throw DimensionMismatch("pY does not match constraint grid");

  if (n == 1) {
    double avg = 0.0;
    for (int y = 0; y < m; ++y) avg += pY(y) * c.at(0, y);
    if (std::fabs(avg - c.target) > 1e-10 * (1.0 + std::fabs(c.target)))
      throw Infeasible("n = 1 leaves no freedom and the constraint fails");
    return std::vector<double>(static_cast<std::size_t>(m), 1.0);
  }

  // solved cell: last row of the last column carrying observation weight
  int ystar = -1;
  for (int y = m - 1; y >= 0; --y)
    if (pY(y) > 0.0) {
      ystar = y;
      break;
    }
  if (ystar < 0) throw Infeasible("pY has no support");
  const int xstar = n - 1;

  std::vector<double> grid(static_cast<std::size_t>(n) * m);
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = rng.uniform_positive();
    // contribution of every column except the solved one
    double outside = 0.0;
    for (int y = 0; y < m; ++y) {
      if (y == ystar || pY(y) == 0.0) continue;
      double num = 0.0, den = 0.0;
      for (int x = 0; x < n; ++x) {
        const double w = grid[static_cast<std::size_t>(x) * m + y];
        num += w * (c.at(x, y) - c.target);
        den += w;
      }
      outside += pY(y) * num / den;
    }
    double partial_num = 0.0, partial_den = 0.0;
    for (int x = 0; x < n; ++x) {
      if (x == xstar) continue;
      const double w = grid[static_cast<std::size_t>(x) * m + ystar];
      partial_num += w * (c.at(x, ystar) - c.target);
      partial_den += w;
    }
    const double denom = pY(ystar) * (c.at(xstar, ystar) - c.target) + outside;
    if (denom == 0.0) continue;
    const double solved = -(outside * partial_den + pY(ystar) * partial_num) / denom;
    if (!(solved > 0.0) || !std::isfinite(solved)) continue;
    grid[static_cast<std::size_t>(xstar) * m + ystar] = solved;
    for (int y = 0; y < m; ++y) {
      double s = 0.0;
      for (int x = 0; x < n; ++x) s += grid[static_cast<std::size_t>(x) * m + y];
      for (int x = 0; x < n; ++x) grid[static_cast<std::size_t>(x) * m + y] /= s;
    }
    return grid;
  }
  throw RejectionBudgetExhausted("no nonnegative completion in " +
                                 std::to_string(max_tries) + " tries");
}

std::vector<double> builtin_score(const std::string& name, int n, int m) {
  std::vector<double> score(static_cast<std::size_t>(n) * m);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y) {
      const double k = x + 1, l = y + 1;
      if (name == "abs-diff")
        score[static_cast<std::size_t>(x) * m + y] = std::fabs(k - l);
      else if (name == "product")
        score[static_cast<std::size_t>(x) * m + y] = k * l;
      else
        throw UsageError("unknown score '" + name +
                         "' (expected abs-diff or product, or a CSV path)");
    }
  return score;
}

namespace {

SummaryStat summarize(const std::vector<double>& values) {
  SummaryStat s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / (static_cast<double>(values.size()) - 1.0) /
                            static_cast<double>(values.size()));
  }
  return s;
}

std::vector<double> scale_by_marginal(const std::vector<double>& conditional,
                                      const ObservedMarginal& pY, int n, int m) {
  std::vector<double> cells(conditional.size());
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y)
      cells[static_cast<std::size_t>(x) * m + y] =
          conditional[static_cast<std::size_t>(x) * m + y] * pY(y);
  return cells;
}

}  // namespace

ComparisonReport run_d1_d2(int n, int m, const std::vector<double>& score,
                           double beta, int S, std::uint64_t seed, int threads) {
  if (S < 1) throw Error("run_d1_d2: S >= 1");
  ComparisonReport report;
  report.n = n;
  report.m = m;
  report.S = S;
  report.beta = beta;
  report.seed = seed;

  std::vector<std::optional<std::array<double, 4>>> slots(
      static_cast<std::size_t>(S));
  parallel_for(S, threads, [&](int k) {
    RngStream rng(seed, static_cast<std::uint64_t>(k));
    const FiniteJoint truth = sample_random_joint(n, m, rng);
    const ObservedMarginal py(truth.marginal_y());
    LinearConstraint c{n, m, score, 0.0};
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y) c.target += c.at(x, y) * truth(x, y);
    std::optional<LagrangeSolution> solved;
    try {
      solved = solve_known_average(py, c, beta);
    } catch (const Error&) {
      return;  // recorded as a skip
    }
    const std::vector<double> q = sample_constrained_conditional(py, c, rng);
    const std::vector<double> guess = scale_by_marginal(q, py, n, m);
    slots[static_cast<std::size_t>(k)] = std::array<double, 4>{
        hellinger(truth.cells(), solved->joint.cells()),
        hellinger(truth.cells(), guess),
        relative_entropy(truth.cells(), solved->joint.cells()),
        relative_entropy(truth.cells(), guess)};
  });

  std::vector<double> d1, d2, k1, k2;
  for (int k = 0; k < S; ++k) {
    if (!slots[static_cast<std::size_t>(k)]) {
      ++report.skipped;
      continue;
    }
    const auto& row = *slots[static_cast<std::size_t>(k)];
    report.per_sample.push_back(row);
    report.sample_index.push_back(k);
    d1.push_back(row[0]);
    d2.push_back(row[1]);
    k1.push_back(row[2]);
    k2.push_back(row[3]);
  }
  report.D1 = summarize(d1);
  report.D2 = summarize(d2);
  report.K1 = summarize(k1);
  report.K2 = summarize(k2);
  return report;
}

ComparisonReport run_d3(int n, int m, const std::vector<double>& score,
                        double beta, int S, int M, std::uint64_t seed,
                        int threads) {
  if (S < 1 || M < 1) throw Error("run_d3: S, M >= 1");
  ComparisonReport report;
  report.n = n;
  report.m = m;
  report.S = S;
  report.M = M;
  report.beta = beta;
  report.seed = seed;

  std::vector<std::optional<std::array<double, 4>>> slots(
      static_cast<std::size_t>(S));
  parallel_for(S, threads, [&](int k) {
    RngStream rng(seed, static_cast<std::uint64_t>(k));
    const FiniteJoint truth = sample_random_joint(n, m, rng);
    const ObservedMarginal py(truth.marginal_y());
    LinearConstraint c{n, m, score, 0.0};
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y) c.target += c.at(x, y) * truth(x, y);
    std::optional<LagrangeSolution> solved;
    try {
      solved = solve_known_average(py, c, beta);
    } catch (const Error&) {
      return;
    }
    std::vector<double> mean_conditional(static_cast<std::size_t>(n) * m, 0.0);
    for (int l = 0; l < M; ++l) {
      const std::vector<double> q = sample_constrained_conditional(py, c, rng);
      for (std::size_t i = 0; i < q.size(); ++i) mean_conditional[i] += q[i] / M;
    }
    const std::vector<double> guess = scale_by_marginal(mean_conditional, py, n, m);
    slots[static_cast<std::size_t>(k)] = std::array<double, 4>{
        hellinger(truth.cells(), guess) -
            hellinger(truth.cells(), solved->joint.cells()),
        relative_entropy(truth.cells(), guess) -
            relative_entropy(truth.cells(), solved->joint.cells()),
        0.0, 0.0};
  });

  std::vector<double> dd3, dk3;
  for (int k = 0; k < S; ++k) {
    if (!slots[static_cast<std::size_t>(k)]) {
      ++report.skipped;
      continue;
    }
    const auto& row = *slots[static_cast<std::size_t>(k)];
    report.per_sample.push_back(row);
    report.sample_index.push_back(k);
    dd3.push_back(row[0]);
    dk3.push_back(row[1]);
  }
  report.DeltaD3 = summarize(dd3);
  report.DeltaK3 = summarize(dk3);
  return report;
}

void write_d1_d2_csv(std::ostream& os, const ComparisonReport& report) {
  os << "k,D1_term,D2_term,K1_term,K2_term\n";
  for (std::size_t i = 0; i < report.per_sample.size(); ++i) {
    const auto& row = report.per_sample[i];
    os << report.sample_index[i] << ',' << fmt17(row[0]) << ',' << fmt17(row[1])
       << ',' << fmt17(row[2]) << ',' << fmt17(row[3]) << '\n';
  }
}

void write_d3_csv(std::ostream& os, const ComparisonReport& report) {
  os << "k,DeltaD3_term,DeltaK3_term\n";
  for (std::size_t i = 0; i < report.per_sample.size(); ++i) {
    const auto& row = report.per_sample[i];
    os << report.sample_index[i] << ',' << fmt17(row[0]) << ',' << fmt17(row[1])
       << '\n';
  }
}

std::vector<Fig1Point> run_fig1_sweep(const std::vector<double>& betas,
                                      const ObservedMarginal& pY,
                                      const std::vector<double>& score,
                                      int n_targets) {
  const int m = pY.m();
  const int n = static_cast<int>(score.size()) / m;
  LinearConstraint c{n, m, score, 0.0};
  const auto [lo, hi] = feasible_E_bounds(pY, c);
  std::vector<Fig1Point> points;
  points.reserve(betas.size() * static_cast<std::size_t>(n_targets));
  for (double beta : betas) {
    for (int i = 1; i <= n_targets; ++i) {
      c.target = lo + (hi - lo) * i / (n_targets + 1);
      const LagrangeSolution sol = solve_known_average(pY, c, beta);
      points.push_back(
          {beta, c.target, hellinger(sol.joint.marginal_y(), pY.weights())});
    }
  }
  return points;
}

void write_fig1_csv(std::ostream& os, const std::vector<Fig1Point>& points) {
  os << "beta,E,hellinger\n";
  for (const Fig1Point& p : points)
    os << fmt17(p.beta) << ',' << fmt17(p.target) << ',' << fmt17(p.hellinger)
       << '\n';
}

// ---------- maximum-entropy constraint-relevance study ----------

std::vector<double> maxent_uniform(int n) {
  return std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
}

namespace {

struct GibbsStats {
  std::vector<double> q;
  double m1, m2;     // first two moments
  double c11, c12, c22;  // covariances of (z, z^2)
};

GibbsStats gibbs_stats(const std::vector<double>& z, double b1, double b2) {
  GibbsStats s;
  s.q.resize(z.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < z.size(); ++k)
    top = std::max(top, -b1 * z[k] - b2 * z[k] * z[k]);
  double norm = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    s.q[k] = std::exp(-b1 * z[k] - b2 * z[k] * z[k] - top);
    norm += s.q[k];
  }
  s.m1 = s.m2 = 0.0;
  double m3 = 0.0, m4 = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    s.q[k] /= norm;
    s.m1 += s.q[k] * z[k];
    s.m2 += s.q[k] * z[k] * z[k];
    m3 += s.q[k] * z[k] * z[k] * z[k];
    m4 += s.q[k] * z[k] * z[k] * z[k] * z[k];
  }
  s.c11 = s.m2 - s.m1 * s.m1;
  s.c12 = m3 - s.m1 * s.m2;
  s.c22 = m4 - s.m2 * s.m2;
  return s;
}

double solve_mean_multiplier(const std::vector<double>& z, double mu) {
  double lo = -60.0, hi = 60.0;  // mean is decreasing in the multiplier
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (gibbs_stats(z, mid, 0.0).m1 > mu)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> maxent_mean_gibbs(const std::vector<double>& z, double mu) {
  return gibbs_stats(z, solve_mean_multiplier(z, mu), 0.0).q;
}

bool maxent_two_moment_gibbs(const std::vector<double>& z, double mu,
                             double mu2, std::vector<double>* q_out) {
  double b1 = solve_mean_multiplier(z, mu);
  double b2 = 0.0;
  GibbsStats s = gibbs_stats(z, b1, b2);
  double err = std::max(std::fabs(s.m1 - mu), std::fabs(s.m2 - mu2));
  for (int iter = 0; iter < 200; ++iter) {
    if (err <= 1e-10) {
      *q_out = s.q;
      return true;
    }
    const double det = s.c11 * s.c22 - s.c12 * s.c12;
    if (!(std::fabs(det) > 1e-300)) return false;
    // moment Jacobian is minus the covariance matrix
    const double f1 = s.m1 - mu, f2 = s.m2 - mu2;
    const double step1 = (s.c22 * f1 - s.c12 * f2) / det;
    const double step2 = (-s.c12 * f1 + s.c11 * f2) / det;
    double alpha = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving, alpha *= 0.5) {
      const double n1 = b1 + alpha * step1;
      const double n2 = b2 + alpha * step2;
      if (std::fabs(n1) > 300.0 || std::fabs(n2) > 300.0) continue;
      const GibbsStats trial = gibbs_stats(z, n1, n2);
      const double trial_err =
          std::max(std::fabs(trial.m1 - mu), std::fabs(trial.m2 - mu2));
      if (trial_err < err) {
        b1 = n1;
        b2 = n2;
        s = trial;
        err = trial_err;
        moved = true;
        break;
      }
    }
    if (!moved) return false;
  }
  return false;
}

std::vector<double> maxent_fixed_median(int n, int median_index) {
  // mass 1/2 spread uniformly over the first j values and 1/2 over the
  // rest, with j capped at n-1 (the top-value median reuses the split
  // below it); the tie-breaking epsilon of the construction is dropped
  const int j = std::min(median_index + 1, n - 1);  // 1-based count below/at
  std::vector<double> q(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    q[static_cast<std::size_t>(k)] = (k < j) ? 0.5 / j : 0.5 / (n - j);
  return q;
}

std::vector<MaxentRow> run_maxent_study(int n, const std::vector<double>& z,
                                        const std::vector<int>& m_list,
                                        int n_samples, int n_draws,
                                        std::uint64_t seed, int threads) {
  if (static_cast<int>(z.size()) != n)
    throw DimensionMismatch("run_maxent_study: z size != n");
  for (std::size_t i = 1; i < z.size(); ++i)
    if (!(z[i] > z[i - 1]))
      throw Error("run_maxent_study: z values must be strictly increasing");

  std::vector<MaxentRow> rows;
  for (std::size_t mi = 0; mi < m_list.size(); ++mi) {
    const int M = m_list[mi];
    struct DrawOutcome {
      double d[4];  // <d1>, <d12>, <dmd>, d0
      int failures;
    };
    std::vector<DrawOutcome> outcomes(static_cast<std::size_t>(n_draws));
    parallel_for(n_draws, threads, [&](int j) {
      RngStream rng(seed, (static_cast<std::uint64_t>(mi) << 32) ^
                              static_cast<std::uint64_t>(j));
      std::vector<double> truth(static_cast<std::size_t>(n));
      double total = 0.0;
      for (double& v : truth) {
        v = rng.uniform_positive();
        total += v;
      }
      for (double& v : truth) v /= total;
      std::vector<double> cdf(truth.size());
      double acc = 0.0;
      for (std::size_t k = 0; k < truth.size(); ++k) {
        acc += truth[k];
        cdf[k] = acc;
      }

      DrawOutcome out{};
      out.d[3] = hellinger(maxent_uniform(n), truth);
      std::vector<int> counts(static_cast<std::size_t>(n));
      std::vector<double> q12;
      int accepted = 0;
      for (int i = 0; i < n_samples; ++i) {
        std::fill(counts.begin(), counts.end(), 0);
        double mu = 0.0, mu2 = 0.0;
        for (int u = 0; u < M; ++u) {
          const double r = rng.uniform01();
          int k = 0;
          while (k + 1 < n && r >= cdf[static_cast<std::size_t>(k)]) ++k;
          ++counts[static_cast<std::size_t>(k)];
          mu += z[static_cast<std::size_t>(k)];
          mu2 += z[static_cast<std::size_t>(k)] * z[static_cast<std::size_t>(k)];
        }
        mu /= M;
        mu2 /= M;
        if (!maxent_two_moment_gibbs(z, mu, mu2, &q12)) {
          ++out.failures;
          continue;
        }
        // empirical median: lower-middle order statistic
        const int rank = (M + 1) / 2;
        int cum = 0, med = 0;
        for (int k = 0; k < n; ++k) {
          cum += counts[static_cast<std::size_t>(k)];
          if (cum >= rank) {
            med = k;
            break;
          }
        }
        out.d[0] += hellinger(maxent_mean_gibbs(z, mu), truth);
        out.d[1] += hellinger(q12, truth);
        out.d[2] += hellinger(maxent_fixed_median(n, med), truth);
        ++accepted;
      }
      if (accepted > 0)
        for (int e = 0; e < 3; ++e) out.d[e] /= accepted;
      outcomes[static_cast<std::size_t>(j)] = out;
    });

    MaxentRow row{};
    row.M = M;
    int wins[4] = {0, 0, 0, 0};
    for (const DrawOutcome& out : outcomes) {
      int arg = 0;
      for (int e = 1; e < 4; ++e)
        if (out.d[e] < out.d[arg]) arg = e;
      ++wins[arg];
      row.dbar1 += out.d[0];
      row.dbar12 += out.d[1];
      row.dbarmd += out.d[2];
      row.dbar0 += out.d[3];
      row.failures += out.failures;
    }
    row.pct_d1 = 100.0 * wins[0] / n_draws;
    row.pct_d12 = 100.0 * wins[1] / n_draws;
    row.pct_md = 100.0 * wins[2] / n_draws;
    row.pct_d0 = 100.0 * wins[3] / n_draws;
    row.dbar1 /= n_draws;
    row.dbar12 /= n_draws;
    row.dbarmd /= n_draws;
    row.dbar0 /= n_draws;
    rows.push_back(row);
  }
  return rows;
}

void write_maxent_csv(std::ostream& os, const std::vector<MaxentRow>& rows) {
  os << "M,pct_d1,pct_d12,pct_md,pct_d0,dbar1,dbar12,dbarmd,dbar0\n";
  for (const MaxentRow& r : rows)
    os << r.M << ',' << fmt17(r.pct_d1) << ',' << fmt17(r.pct_d12) << ','
       << fmt17(r.pct_md) << ',' << fmt17(r.pct_d0) << ',' << fmt17(r.dbar1)
       << ',' << fmt17(r.dbar12) << ',' << fmt17(r.dbarmd) << ','
       << fmt17(r.dbar0) << '\n';
}

}  // namespace genlik
