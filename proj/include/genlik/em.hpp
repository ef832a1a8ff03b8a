#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "genlik/grid.hpp"

namespace genlik {

struct Interval {
  double lo, hi;
};

// A parametric family theta -> p_theta(x,y). `bounds` may be empty
// (every coordinate free) or hold one closed interval per coordinate.
// `joint` must be safe to call concurrently if the caller runs
// experiments in parallel.
struct ParametricFamily {
  int dim;
  std::function<FiniteJoint(const std::vector<double>&)> joint;
  std::vector<Interval> bounds;
};

// Q(theta, theta~) = sum_y pY(y) sum_x zeta_theta(x|y;beta) ln p_theta~(x,y).
double q_function(const ParametricFamily& family,
                  const std::vector<double>& theta,
                  const std::vector<double>& theta_tilde,
                  const ObservedMarginal& pY, double beta);

struct InnerOptimizerSettings {
  int max_evaluations = 200;  // family evaluations per EM step
  double tol = 1e-12;         // coordinate interval tolerance
};

// One EM iteration: maximize Q(theta, .) by coordinate ascent with
// golden-section line searches; any strict Q improvement also improves
// L_beta, and a flat Q returns theta unchanged.
std::vector<double> em_step(const ParametricFamily& family,
                            const std::vector<double>& theta,
                            const ObservedMarginal& pY, double beta,
                            const InnerOptimizerSettings& inner = {});

enum class EmStopReason { kDeltaTol, kMaxIters };

struct EmTracePoint {
  int iter;
  std::vector<double> theta;
  double l_beta;
  double grad_norm;  // max-norm of the finite-difference gradient
};

struct EmStop {
  int max_iters = 200;
  double delta_tol = 1e-9;  // |dL| threshold, 3 consecutive hits
};

struct EmTrace {
  std::vector<EmTracePoint> points;
  EmStopReason stop_reason;
  // finite-difference Hessian eigenvalue signs at the terminal point
  // (-1 / 0 / +1); all -1 and the fixed point is a local maximum, mixed
  // signs a saddle, zeros leave it undecided
  std::vector<int> hessian_signs;

  const EmTracePoint& back() const { return points.back(); }
  void write_csv(std::ostream& os) const;
};

EmTrace em_run(const ParametricFamily& family, std::vector<double> theta0,
               const ObservedMarginal& pY, double beta, const EmStop& stop = {});

// Central finite-difference gradient of L_beta(theta).
std::vector<double> l_beta_gradient_fd(const ParametricFamily& family,
                                       const std::vector<double>& theta,
                                       const ObservedMarginal& pY, double beta,
                                       double step = 1e-6);

}  // namespace genlik
