#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "genlik/constrained.hpp"
#include "genlik/grid.hpp"

namespace genlik {

// Constraint set C for the beta > 1 maximization: any of the observed
// marginal, the hidden marginal and a list of linear averages. n and m
// fix the grid when neither marginal pins it.
struct FeasibleSet {
  int n = 0, m = 0;
  std::optional<ObservedMarginal> pY;
  std::optional<ObservedMarginal> pX;
  std::vector<LinearConstraint> constraints;
};

struct SparseSolution {
  FiniteJoint joint;
  int zero_count;  // entries below 1e-15
  std::vector<std::pair<int, int>> selection_order;  // greedy (x,y) order
  double l_inf_value;  // h-likelihood of the joint against pY
};

// Stack the largest admissible mass one cell at a time, each stage
// keeping all previously fixed cells as constraints; ties go to the
// lowest (x,y) in lexicographic order. Known-marginal budgets are
// closed-form; any linear constraints switch the stage maximization to
// a small LP.
SparseSolution greedy_majorize(const FeasibleSet& feasible);

// Largest value cell (cx,cy) can take under the feasible set with the
// given cells already fixed; the LP route of the stage maximization,
// usable as an independent check of the closed-form path.
double stage_max_lp(const FeasibleSet& feasible,
                    const std::vector<std::pair<std::pair<int, int>, double>>&
                        fixed_cells,
                    int cx, int cy);

struct MultistartResult {
  FiniteJoint best;
  double value;                      // L_beta at the best local maximizer
  std::vector<double> start_values;  // local-optimum value per start
};

// Best-of-multistart local maximization of L_beta (beta > 1) over the
// polytope: exponentiated-gradient steps on each conditional column,
// marginal re-projection, and a final snap of vanished entries onto the
// vertex support. Start k draws from stream (seed, k); the reduction is
// by start index, so the answer does not depend on the thread count.
MultistartResult numeric_max_beta_gt1(const FeasibleSet& feasible, double beta,
                                      int multistart, std::uint64_t seed,
                                      int threads = 1);

struct EntropyCompareReport {
  double greedy_entropy;
  int samples;
  int negative_margins;  // margins below -1e-9
  double min_margin;
  double mean_margin;
};

// Joint entropy of the greedy solution against rejection/IPF-sampled
// feasible points; the greedy point should sit at the entropy minimum.
EntropyCompareReport min_entropy_compare(const FeasibleSet& feasible,
                                         const SparseSolution& solution,
                                         int samples, std::uint64_t seed);

// One feasible joint drawn from the set (IPF onto both marginals, a
// random conditional under pY alone, or a random grid).
FiniteJoint sample_feasible_joint(const FeasibleSet& feasible, std::uint64_t seed,
                                  std::uint64_t stream_id);

}  // namespace genlik
