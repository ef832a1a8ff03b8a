#include "genlik/root_find.hpp"

#include <cmath>

#include "genlik/errors.hpp"

namespace genlik {

BisectResult bisect(const std::function<double(double)>& f, double lo,
                    double hi, double xtol, double ftol, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return {lo, 0.0};
  if (fhi == 0.0) return {hi, 0.0};
  if (std::signbit(flo) == std::signbit(fhi))
    throw RootBracketFailure("bisect: no sign change on interval");
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if (fmid == 0.0 || (ftol > 0.0 && std::fabs(fmid) <= ftol))
      return {mid, fmid};
    if (std::signbit(fmid) == std::signbit(flo)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
    if (hi - lo <= xtol * (1.0 + std::fabs(mid))) break;
  }
  const double root = 0.5 * (lo + hi);
  return {root, f(root)};
}

std::optional<ScanBracket> scan_for_sign_change(
    const std::function<double(double)>& f, double start, double step0,
    double growth, double limit, int direction) {
  double prev_x = 0.0, prev_f = 0.0;
  bool have_prev = false;
  for (double step = step0; step <= limit; step *= growth) {
    const double x = start + direction * step;
    const double fx = f(x);
    if (!std::isfinite(fx)) break;  // left the solver's domain
    if (have_prev && prev_f != 0.0 && std::signbit(fx) != std::signbit(prev_f)) {
      if (prev_x < x) return ScanBracket{prev_x, x};
      return ScanBracket{x, prev_x};
    }
    prev_x = x;
    prev_f = fx;
    have_prev = true;
  }
  return std::nullopt;
}

double golden_max(const std::function<double(double)>& f, double lo, double hi,
                  double xtol, int evaluations) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  int used = 2;
  while (used < evaluations && (b - a) > xtol * (1.0 + std::fabs(a) + std::fabs(b))) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
    ++used;
  }
  return f1 >= f2 ? x1 : x2;
}

}  // namespace genlik
