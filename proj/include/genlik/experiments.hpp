#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "genlik/constrained.hpp"
#include "genlik/grid.hpp"
#include "genlik/rng.hpp"

namespace genlik {

// Run fn(0..count-1) on up to `threads` workers. Each index must be
// self-contained (own RNG stream, own output slot); results then do not
// depend on the thread count.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

// n*m iid uniforms on [0,1), normalized to a joint.
FiniteJoint sample_random_joint(int n, int m, RngStream& rng);

// Rejection scheme for a random conditional q(x|y) under the average
// constraint: draw nm-1 positive weights, solve the last one from the
// linear constraint, redraw while it comes out negative. Returns the
// column-normalized conditional grid (row-major, n x m).
std::vector<double> sample_constrained_conditional(const ObservedMarginal& pY,
                                                   const LinearConstraint&
                                                       constraint,
                                                   RngStream& rng,
                                                   int max_tries = 100000);

// Builtin score grids: "abs-diff" -> |x-y|, "product" -> x*y on 1-based
// indices.
std::vector<double> builtin_score(const std::string& name, int n, int m);

struct SummaryStat {
  double mean = 0.0;
  double std_error = 0.0;  // sample stdev / sqrt(S)
};

struct ComparisonReport {
  int n = 0, m = 0, S = 0, M = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  SummaryStat D1, D2, K1, K2;          // single-guess comparison
  SummaryStat DeltaD3, DeltaK3;        // averaged-guess comparison
  int skipped = 0;                     // per-sample solver failures
  // d1d2: (D1,D2,K1,K2) per sample; d3: (DeltaD3,DeltaK3,0,0)
  std::vector<std::array<double, 4>> per_sample;
  std::vector<int> sample_index;       // original k of each per_sample row
};

// True joints drawn uniformly, recovered through the known-average
// solver, compared against one random constrained guess; Hellinger and
// relative-entropy averages.
ComparisonReport run_d1_d2(int n, int m, const std::vector<double>& score,
                           double beta, int S, std::uint64_t seed,
                           int threads = 1);

// Same, but the guess averages M random constrained conditionals; the
// report carries the paired distance gaps.
ComparisonReport run_d3(int n, int m, const std::vector<double>& score,
                        double beta, int S, int M, std::uint64_t seed,
                        int threads = 1);

void write_d1_d2_csv(std::ostream& os, const ComparisonReport& report);
void write_d3_csv(std::ostream& os, const ComparisonReport& report);

struct Fig1Point {
  double beta;
  double target;
  double hellinger;
};

// Hellinger distance of the recovered observed marginal from pY, per
// beta and per target; targets are evenly spaced strictly inside the
// feasible interval.
std::vector<Fig1Point> run_fig1_sweep(const std::vector<double>& betas,
                                      const ObservedMarginal& pY,
                                      const std::vector<double>& score,
                                      int n_targets);
void write_fig1_csv(std::ostream& os, const std::vector<Fig1Point>& points);

// ---------- maximum-entropy constraint-relevance study ----------

// The four estimators from a sample of length M over values z:
// no constraint, mean-matched Gibbs, two-moment Gibbs, fixed-median.
std::vector<double> maxent_uniform(int n);
std::vector<double> maxent_mean_gibbs(const std::vector<double>& z, double mu);
// two-moment solve may fail near the moment-set boundary
bool maxent_two_moment_gibbs(const std::vector<double>& z, double mu,
                             double mu2, std::vector<double>* q_out);
std::vector<double> maxent_fixed_median(int n, int median_index);

struct MaxentRow {
  int M;
  // percentage of probability draws each estimator wins; order
  // d1, d12, md, d0 as in the output columns
  double pct_d1, pct_d12, pct_md, pct_d0;
  double dbar1, dbar12, dbarmd, dbar0;
  int failures;  // skipped samples (two-moment solve did not converge)
};

std::vector<MaxentRow> run_maxent_study(int n, const std::vector<double>& z,
                                        const std::vector<int>& m_list,
                                        int n_samples, int n_draws,
                                        std::uint64_t seed, int threads = 1);
void write_maxent_csv(std::ostream& os, const std::vector<MaxentRow>& rows);

}  // namespace genlik
