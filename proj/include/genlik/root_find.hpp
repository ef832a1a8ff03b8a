#pragma once

#include <functional>
#include <optional>

namespace genlik {

struct BisectResult {
  double root;
  double f_at_root;
};

// Bisection on [lo, hi]; f(lo) and f(hi) must have opposite signs.
// Runs until the interval narrows to xtol (relative to |root|+1) or
// |f| <= ftol. Deterministic, derivative-free.
BisectResult bisect(const std::function<double(double)>& f, double lo,
                    double hi, double xtol = 1e-15, double ftol = 0.0,
                    int max_iter = 200);

// Geometric scan for a sign change of f over points
// start + direction*step0*growth^k, k = 0,1,...  Points where f is not
// finite (or `valid` says no) end the scan. Returns the bracketing pair
// if found.
struct ScanBracket {
  double lo, hi;  // f(lo) and f(hi) have opposite signs
};
std::optional<ScanBracket> scan_for_sign_change(
    const std::function<double(double)>& f, double start, double step0,
    double growth, double limit, int direction);

// Golden-section maximization of f on [lo, hi]; returns the argmax.
// `evaluations` caps the number of f calls.
double golden_max(const std::function<double(double)>& f, double lo, double hi,
                  double xtol = 1e-10, int evaluations = 200);

}  // namespace genlik
