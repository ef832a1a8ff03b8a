#include "genlik/majorize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "genlik/errors.hpp"
#include "genlik/likelihood.hpp"
#include "genlik/rng.hpp"

namespace genlik {

namespace {

constexpr double kZeroCell = 1e-15;

void validate_feasible(const FeasibleSet& fs) {
  int n = fs.n, m = fs.m;
  if (fs.pY) m = fs.pY->m();
  if (fs.pX) n = fs.pX->m();
  for (const LinearConstraint& c : fs.constraints) {
    if ((n && c.n != n) || (m && c.m != m))
      throw DimensionMismatch("feasible set: constraint grid shape mismatch");
    n = c.n;
    m = c.m;
  }
  if (n < 1 || m < 1)
    throw DimensionMismatch("feasible set: grid shape not determined");
  if (fs.n && fs.n != n)
    throw DimensionMismatch("feasible set: n does not match marginals");
  if (fs.m && fs.m != m)
    throw DimensionMismatch("feasible set: m does not match marginals");
}

std::pair<int, int> grid_shape(const FeasibleSet& fs) {
  int n = fs.n, m = fs.m;
  if (fs.pY) m = fs.pY->m();
  if (fs.pX) n = fs.pX->m();
  if (!fs.constraints.empty()) {
    n = fs.constraints.front().n;
    m = fs.constraints.front().m;
  }
  return {n, m};
}

// ---------- dense two-phase simplex, Bland's rule ----------
//
// maximize obj.x subject to A x = b, x >= 0. All our LPs are bounded
// (total mass is pinned), so "unbounded" signals a modelling bug.

struct LpResult {
  double value;
  std::vector<double> x;
};

LpResult solve_equality_lp(int rows, int cols, std::vector<double> A,
                           std::vector<double> b,
                           const std::vector<double>& obj) {
  constexpr double kPivotTol = 1e-11;
  const int width = cols + rows;  // structural + artificial
  std::vector<double> T(static_cast<std::size_t>(rows) * width, 0.0);
  std::vector<double> rhs(static_cast<std::size_t>(rows), 0.0);
  std::vector<int> basis(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i) {
    double sgn = (b[static_cast<std::size_t>(i)] < 0.0) ? -1.0 : 1.0;
    for (int j = 0; j < cols; ++j)
      T[static_cast<std::size_t>(i) * width + j] =
          sgn * A[static_cast<std::size_t>(i) * cols + j];
    T[static_cast<std::size_t>(i) * width + cols + i] = 1.0;
    rhs[static_cast<std::size_t>(i)] = sgn * b[static_cast<std::size_t>(i)];
    basis[static_cast<std::size_t>(i)] = cols + i;
  }

  const auto pivot = [&](int row, int col) {
    const double p = T[static_cast<std::size_t>(row) * width + col];
    for (int j = 0; j < width; ++j)
      T[static_cast<std::size_t>(row) * width + j] /= p;
    rhs[static_cast<std::size_t>(row)] /= p;
    for (int i = 0; i < rows; ++i) {
      if (i == row) continue;
      const double f = T[static_cast<std::size_t>(i) * width + col];
      if (f == 0.0) continue;
      for (int j = 0; j < width; ++j)
        T[static_cast<std::size_t>(i) * width + j] -=
            f * T[static_cast<std::size_t>(row) * width + j];
      rhs[static_cast<std::size_t>(i)] -= f * rhs[static_cast<std::size_t>(row)];
    }
    basis[static_cast<std::size_t>(row)] = col;
  };

  // phase = 1 minimizes artificial mass; phase = 2 maximizes obj over
  // structural columns only
  const auto run = [&](int phase) {
    const auto cost = [&](int j) {
      if (phase == 1) return (j >= cols) ? -1.0 : 0.0;
      return (j >= cols) ? 0.0 : obj[static_cast<std::size_t>(j)];
    };
    for (int iter = 0; iter < 20000; ++iter) {
      int enter = -1;
      for (int j = 0; j < (phase == 1 ? width : cols); ++j) {
        double reduced = cost(j);
        for (int i = 0; i < rows; ++i)
          reduced -= cost(basis[static_cast<std::size_t>(i)]) *
                     T[static_cast<std::size_t>(i) * width + j];
        if (reduced > kPivotTol) {
          enter = j;  // Bland: first improving column
          break;
        }
      }
      if (enter < 0) return;
      int leave = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < rows; ++i) {
        const double a = T[static_cast<std::size_t>(i) * width + enter];
        if (a > kPivotTol) {
          const double ratio = rhs[static_cast<std::size_t>(i)] / a;
          if (leave < 0 || ratio < best_ratio - kPivotTol ||
              (ratio < best_ratio + kPivotTol &&
               basis[static_cast<std::size_t>(i)] <
                   basis[static_cast<std::size_t>(leave)]))
            leave = i, best_ratio = ratio;
        }
      }
      if (leave < 0) throw Error("simplex: unbounded (missing mass bound?)");
      pivot(leave, enter);
    }
    throw Error("simplex: iteration cap hit");
  };

  run(1);
  double infeasibility = 0.0;
  for (int i = 0; i < rows; ++i)
    if (basis[static_cast<std::size_t>(i)] >= cols)
      infeasibility += rhs[static_cast<std::size_t>(i)];
  if (infeasibility > 1e-9)
    throw InfeasibleConstraints("constraint polytope is empty (phase-1 mass " +
                                std::to_string(infeasibility) + ")");
  run(2);

  LpResult out;
  out.x.assign(static_cast<std::size_t>(cols), 0.0);
  for (int i = 0; i < rows; ++i)
    if (basis[static_cast<std::size_t>(i)] < cols)
      out.x[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])] =
          rhs[static_cast<std::size_t>(i)];
  out.value = 0.0;
  for (int j = 0; j < cols; ++j)
    out.value += obj[static_cast<std::size_t>(j)] * out.x[static_cast<std::size_t>(j)];
  return out;
}

// Assemble the stage LP over all nm cell variables: fixed cells become
// equality rows, marginal/average constraints their usual rows.
LpResult stage_lp(const FeasibleSet& fs,
                  const std::vector<std::pair<std::pair<int, int>, double>>&
                      fixed_cells,
                  int cx, int cy) {
  const auto [n, m] = grid_shape(fs);
  const int cols = n * m;
  std::vector<double> A;
  std::vector<double> b;
  int rows = 0;
  const auto add_row = [&](const std::vector<double>& coef, double val) {
    A.insert(A.end(), coef.begin(), coef.end());
    b.push_back(val);
    ++rows;
  };
  std::vector<double> coef(static_cast<std::size_t>(cols), 0.0);
  if (fs.pY) {
    for (int y = 0; y < m; ++y) {
      std::fill(coef.begin(), coef.end(), 0.0);
      for (int x = 0; x < n; ++x) coef[static_cast<std::size_t>(x) * m + y] = 1.0;
      add_row(coef, (*fs.pY)(y));
    }
  }
  if (fs.pX) {
    for (int x = 0; x < n; ++x) {
      std::fill(coef.begin(), coef.end(), 0.0);
      for (int y = 0; y < m; ++y) coef[static_cast<std::size_t>(x) * m + y] = 1.0;
      add_row(coef, (*fs.pX)(x));
    }
  }
  if (!fs.pY && !fs.pX) {
    std::fill(coef.begin(), coef.end(), 1.0);
    add_row(coef, 1.0);
  }
  for (const LinearConstraint& c : fs.constraints) add_row(c.score, c.target);
  for (const auto& [cell, value] : fixed_cells) {
    std::fill(coef.begin(), coef.end(), 0.0);
    coef[static_cast<std::size_t>(cell.first) * m + cell.second] = 1.0;
    add_row(coef, value);
  }
  std::vector<double> obj(static_cast<std::size_t>(cols), 0.0);
  obj[static_cast<std::size_t>(cx) * m + cy] = 1.0;
  return solve_equality_lp(rows, cols, std::move(A), std::move(b), obj);
}

}  // namespace

double stage_max_lp(const FeasibleSet& fs,
                    const std::vector<std::pair<std::pair<int, int>, double>>&
                        fixed_cells,
                    int cx, int cy) {
  validate_feasible(fs);
  return stage_lp(fs, fixed_cells, cx, cy).value;
}

SparseSolution greedy_majorize(const FeasibleSet& fs) {
  validate_feasible(fs);
  const auto [n, m] = grid_shape(fs);
  const bool use_lp = !fs.constraints.empty();
  if (use_lp)  // feasibility pre-solve; throws when the polytope is empty
    stage_lp(fs, {}, 0, 0);

  std::vector<double> cells(static_cast<std::size_t>(n) * m, 0.0);
  std::vector<char> fixed(cells.size(), 0);
  std::vector<std::pair<std::pair<int, int>, double>> fixed_list;
  std::vector<std::pair<int, int>> order;
  order.reserve(cells.size());

  std::vector<double> row_budget(static_cast<std::size_t>(n), 0.0);
  std::vector<double> col_budget(static_cast<std::size_t>(m), 0.0);
  double total_budget = 1.0;
  if (fs.pX)
    for (int x = 0; x < n; ++x) row_budget[static_cast<std::size_t>(x)] = (*fs.pX)(x);
  if (fs.pY)
    for (int y = 0; y < m; ++y) col_budget[static_cast<std::size_t>(y)] = (*fs.pY)(y);

  const auto closed_form_max = [&](int x, int y) {
    double cap = total_budget;
    if (fs.pX) cap = std::min(cap, row_budget[static_cast<std::size_t>(x)]);
    if (fs.pY) cap = std::min(cap, col_budget[static_cast<std::size_t>(y)]);
    return std::max(0.0, cap);
  };

  for (std::size_t stage = 0; stage < cells.size(); ++stage) {
    int best_x = -1, best_y = -1;
    double best_val = -1.0;
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < m; ++y) {
        if (fixed[static_cast<std::size_t>(x) * m + y]) continue;
        const double v = use_lp ? stage_lp(fs, fixed_list, x, y).value
                                : closed_form_max(x, y);
        if (v > best_val + kZeroCell) {  // lex tie-break: strict improvement only
          best_val = v;
          best_x = x;
          best_y = y;
        }
      }
    }
    best_val = std::max(0.0, best_val);
    cells[static_cast<std::size_t>(best_x) * m + best_y] = best_val;
    fixed[static_cast<std::size_t>(best_x) * m + best_y] = 1;
    fixed_list.push_back({{best_x, best_y}, best_val});
    order.push_back({best_x, best_y});
    total_budget -= best_val;
    if (fs.pX) row_budget[static_cast<std::size_t>(best_x)] -= best_val;
    if (fs.pY) col_budget[static_cast<std::size_t>(best_y)] -= best_val;
  }

  FiniteJoint joint(n, m, std::move(cells));
  int zeros = 0;
  for (double v : joint.cells())
    if (v < kZeroCell) ++zeros;
  const ObservedMarginal py_eval =
      fs.pY ? *fs.pY : ObservedMarginal(joint.marginal_y());
  const double l_inf = h_likelihood(joint, py_eval);
  return SparseSolution{std::move(joint), zeros, std::move(order), l_inf};
}

// ---------- sampling ----------

namespace {

// iterative proportional fitting of a positive seed matrix onto the
// requested marginals; converges for strictly positive seeds
std::vector<double> ipf_fit(std::vector<double> cells, int n, int m,
                            const std::vector<double>& row_target,
                            const std::vector<double>& col_target, int sweeps,
                            double tol) {
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double worst = 0.0;
    for (int x = 0; x < n; ++x) {
      double s = 0.0;
      for (int y = 0; y < m; ++y) s += cells[static_cast<std::size_t>(x) * m + y];
      if (s > 0.0) {
        const double f = row_target[static_cast<std::size_t>(x)] / s;
        worst = std::max(worst, std::fabs(f - 1.0));
        for (int y = 0; y < m; ++y) cells[static_cast<std::size_t>(x) * m + y] *= f;
      }
    }
    for (int y = 0; y < m; ++y) {
      double s = 0.0;
      for (int x = 0; x < n; ++x) s += cells[static_cast<std::size_t>(x) * m + y];
      if (s > 0.0) {
        const double f = col_target[static_cast<std::size_t>(y)] / s;
        worst = std::max(worst, std::fabs(f - 1.0));
        for (int x = 0; x < n; ++x) cells[static_cast<std::size_t>(x) * m + y] *= f;
      }
    }
    if (worst < tol) break;
  }
  return cells;
}

}  // namespace

FiniteJoint sample_feasible_joint(const FeasibleSet& fs, std::uint64_t seed,
                                  std::uint64_t stream_id) {
  validate_feasible(fs);
  if (!fs.constraints.empty())
    throw Error(
        "sample_feasible_joint: linear constraint lists are not supported; "
        "only marginal-type feasible sets are sampled");
  const auto [n, m] = grid_shape(fs);
  RngStream rng(seed, stream_id);
  std::vector<double> cells(static_cast<std::size_t>(n) * m);
  for (double& c : cells) c = rng.uniform_positive();
  if (fs.pX && fs.pY) {
    cells = ipf_fit(std::move(cells), n, m, fs.pX->weights(), fs.pY->weights(),
                    4000, 1e-14);
  } else if (fs.pY) {
    for (int y = 0; y < m; ++y) {
      double s = 0.0;
      for (int x = 0; x < n; ++x) s += cells[static_cast<std::size_t>(x) * m + y];
      for (int x = 0; x < n; ++x)
        cells[static_cast<std::size_t>(x) * m + y] *= (*fs.pY)(y) / s;
    }
  } else if (fs.pX) {
    for (int x = 0; x < n; ++x) {
      double s = 0.0;
      for (int y = 0; y < m; ++y) s += cells[static_cast<std::size_t>(x) * m + y];
      for (int y = 0; y < m; ++y)
        cells[static_cast<std::size_t>(x) * m + y] *= (*fs.pX)(x) / s;
    }
  } else {
    double s = 0.0;
    for (double c : cells) s += c;
    for (double& c : cells) c /= s;
  }
  return FiniteJoint(n, m, std::move(cells));
}

EntropyCompareReport min_entropy_compare(const FeasibleSet& fs,
                                         const SparseSolution& solution,
                                         int samples, std::uint64_t seed) {
  const double s_greedy = joint_entropy(solution.joint);
  EntropyCompareReport report{s_greedy, samples, 0,
                              std::numeric_limits<double>::infinity(), 0.0};
  if (samples <= 0) {
    report.min_margin = 0.0;
    return report;
  }
  for (int k = 0; k < samples; ++k) {
    const FiniteJoint sample = sample_feasible_joint(fs, seed, static_cast<std::uint64_t>(k));
    const double margin = joint_entropy(sample) - s_greedy;
    report.min_margin = std::min(report.min_margin, margin);
    report.mean_margin += margin / samples;
    if (margin < -1e-9) ++report.negative_margins;
  }
  return report;
}

// ---------- beta > 1 numeric maximization ----------

namespace {

struct StartOutcome {
  std::vector<double> cells;
  double value;
};

StartOutcome run_one_start(const FeasibleSet& fs, double beta,
                           std::uint64_t seed, std::uint64_t start_index) {
  const auto [n, m] = grid_shape(fs);
  const ObservedMarginal& py = *fs.pY;
  RngStream rng(seed, start_index);

  // conditional columns q(x|y), interior start
  std::vector<double> q(static_cast<std::size_t>(n) * m);
  for (double& v : q) v = 0.05 + rng.uniform01();
  const auto normalize_columns = [&]() {
    for (int y = 0; y < m; ++y) {
      double s = 0.0;
      for (int x = 0; x < n; ++x) s += q[static_cast<std::size_t>(x) * m + y];
      for (int x = 0; x < n; ++x) q[static_cast<std::size_t>(x) * m + y] /= s;
    }
  };
  normalize_columns();

  // joint-space IPF against (pX, pY) expressed on the conditionals
  const auto reproject = [&](int sweeps, double tol) {
    if (!fs.pX) return;
    std::vector<double> joint(q.size());
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y)
        joint[static_cast<std::size_t>(x) * m + y] =
            q[static_cast<std::size_t>(x) * m + y] * py(y);
    joint = ipf_fit(std::move(joint), n, m, fs.pX->weights(), py.weights(),
                    sweeps, tol);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y)
        q[static_cast<std::size_t>(x) * m + y] =
            py(y) > 0.0 ? joint[static_cast<std::size_t>(x) * m + y] / py(y)
                        : (x == 0 ? 1.0 : 0.0);
  };
  reproject(300, 1e-13);

  std::vector<double> grad(q.size(), 0.0);
  double previous_change = 1.0;
  for (int iter = 0; iter < 6000 && previous_change > 1e-15; ++iter) {
    double top = 0.0;
    for (int y = 0; y < m; ++y) {
      double denom = 0.0;
      for (int x = 0; x < n; ++x)
        denom += std::pow(q[static_cast<std::size_t>(x) * m + y], beta);
      for (int x = 0; x < n; ++x) {
        const double v = q[static_cast<std::size_t>(x) * m + y];
        const double g =
            v > 0.0 ? py(y) * std::pow(v, beta - 1.0) / denom : 0.0;
        grad[static_cast<std::size_t>(x) * m + y] = g;
        top = std::max(top, g);
      }
    }
    const double eta = top > 0.0 ? 1.0 / top : 1.0;
    previous_change = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double updated = q[i] * std::exp(eta * grad[i]);
      previous_change = std::max(previous_change, std::fabs(updated - q[i]));
      q[i] = updated;
    }
    normalize_columns();
    reproject(40, 1e-13);
  }

  // snap vanished entries onto the face and polish the marginals there
  std::vector<double> snapped = q;
  for (int y = 0; y < m; ++y) {
    double colmax = 0.0;
    for (int x = 0; x < n; ++x)
      colmax = std::max(colmax, snapped[static_cast<std::size_t>(x) * m + y]);
    for (int x = 0; x < n; ++x)
      if (snapped[static_cast<std::size_t>(x) * m + y] < 1e-9 * colmax)
        snapped[static_cast<std::size_t>(x) * m + y] = 0.0;
  }
  std::vector<double> best_q = q;
  {
    std::vector<double> joint(snapped.size());
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < m; ++y)
        joint[static_cast<std::size_t>(x) * m + y] =
            snapped[static_cast<std::size_t>(x) * m + y] * py(y);
    if (fs.pX)
      joint = ipf_fit(std::move(joint), n, m, fs.pX->weights(), py.weights(),
                      3000, 1e-15);
    // accept the snap only if the support still carries the marginals
    bool ok = true;
    for (int y = 0; y < m && ok; ++y) {
      double s = 0.0;
      for (int x = 0; x < n; ++x) s += joint[static_cast<std::size_t>(x) * m + y];
      if (std::fabs(s - py(y)) > 1e-10) ok = false;
    }
    if (fs.pX)
      for (int x = 0; x < n && ok; ++x) {
        double s = 0.0;
        for (int y = 0; y < m; ++y) s += joint[static_cast<std::size_t>(x) * m + y];
        if (std::fabs(s - (*fs.pX)(x)) > 1e-10) ok = false;
      }
    if (ok) {
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < m; ++y)
          best_q[static_cast<std::size_t>(x) * m + y] =
              py(y) > 0.0 ? joint[static_cast<std::size_t>(x) * m + y] / py(y)
                          : (x == 0 ? 1.0 : 0.0);
    }
  }

  StartOutcome out;
  out.cells.assign(best_q.size(), 0.0);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < m; ++y)
      out.cells[static_cast<std::size_t>(x) * m + y] =
          best_q[static_cast<std::size_t>(x) * m + y] * py(y);
  const FiniteJoint joint(n, m, out.cells);
  out.value = log_generalized_likelihood(joint, py, beta);
  return out;
}

}  // namespace

MultistartResult numeric_max_beta_gt1(const FeasibleSet& fs, double beta,
                                      int multistart, std::uint64_t seed,
                                      int threads) {
  validate_feasible(fs);
  if (!(beta > 1.0)) throw UnsupportedBeta("numeric_max_beta_gt1 needs beta > 1");
  if (!fs.pY) throw Error("numeric_max_beta_gt1: pY is required");
  if (!fs.constraints.empty())
    throw Error("numeric_max_beta_gt1: linear constraint lists not supported");
  if (multistart < 1) multistart = 1;

  std::vector<StartOutcome> outcomes(static_cast<std::size_t>(multistart));
  if (threads <= 1) {
    for (int s = 0; s < multistart; ++s)
      outcomes[static_cast<std::size_t>(s)] =
          run_one_start(fs, beta, seed, static_cast<std::uint64_t>(s));
  } else {
    std::atomic<int> counter{0};
    std::vector<std::thread> pool;
    const int workers = std::min(threads, multistart);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int s = counter.fetch_add(1); s < multistart;
             s = counter.fetch_add(1))
          outcomes[static_cast<std::size_t>(s)] =
              run_one_start(fs, beta, seed, static_cast<std::uint64_t>(s));
      });
    for (std::thread& t : pool) t.join();
  }

  // reduce in start order: strictly better value wins
  int best = 0;
  std::vector<double> values(static_cast<std::size_t>(multistart));
  for (int s = 0; s < multistart; ++s) {
    values[static_cast<std::size_t>(s)] = outcomes[static_cast<std::size_t>(s)].value;
    if (outcomes[static_cast<std::size_t>(s)].value >
        outcomes[static_cast<std::size_t>(best)].value)
      best = s;
  }
  const auto [n, m] = grid_shape(fs);
  return MultistartResult{
      FiniteJoint(n, m, std::move(outcomes[static_cast<std::size_t>(best)].cells)),
      values[static_cast<std::size_t>(best)], std::move(values)};
}

}  // namespace genlik
