#include "genlik/em.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "genlik/errors.hpp"
#include "genlik/io.hpp"
#include "genlik/likelihood.hpp"
#include "genlik/root_find.hpp"

namespace genlik {

namespace {

void check_theta(const ParametricFamily& family,
                 const std::vector<double>& theta) {
  if (static_cast<int>(theta.size()) != family.dim)
    throw DimensionMismatch("theta size does not match family dim");
  if (!family.bounds.empty()) {
    if (static_cast<int>(family.bounds.size()) != family.dim)
      throw DimensionMismatch("bounds size does not match family dim");
    for (int i = 0; i < family.dim; ++i)
      if (theta[static_cast<std::size_t>(i)] < family.bounds[i].lo ||
          theta[static_cast<std::size_t>(i)] > family.bounds[i].hi)
        throw Error("theta out of bounds at coordinate " + std::to_string(i));
  }
}

Interval coordinate_interval(const ParametricFamily& family, int i,
                             double current) {
  if (!family.bounds.empty()) return family.bounds[static_cast<std::size_t>(i)];
  return {current - 50.0, current + 50.0};  // free coordinate: wide local box
}

// Q against a fixed kernel; -inf where theta~ kills support the kernel needs.
double q_against_kernel(const ZetaKernel& kernel, const ObservedMarginal& pY,
                        const FiniteJoint& tilde) {
  double total = 0.0;
  for (int y = 0; y < tilde.m(); ++y) {
    if (pY(y) == 0.0) continue;
    for (int x = 0; x < tilde.n(); ++x) {
      const double z = kernel(x, y);
      if (z == 0.0) continue;
      const double p = tilde(x, y);
      if (p <= 0.0) return -std::numeric_limits<double>::infinity();
      total += pY(y) * z * std::log(p);
    }
  }
  return total;
}

}  // namespace

double q_function(const ParametricFamily& family,
                  const std::vector<double>& theta,
                  const std::vector<double>& theta_tilde,
                  const ObservedMarginal& pY, double beta) {
  check_theta(family, theta);
  check_theta(family, theta_tilde);
  const ZetaKernel kernel = zeta_kernel(family.joint(theta), beta);
  const double q = q_against_kernel(kernel, pY, family.joint(theta_tilde));
  if (!std::isfinite(q))
    throw SupportViolation(
        "q_function: p_theta~ vanishes where the kernel has mass");
  return q;
}

std::vector<double> em_step(const ParametricFamily& family,
                            const std::vector<double>& theta,
                            const ObservedMarginal& pY, double beta,
                            const InnerOptimizerSettings& inner) {
  check_theta(family, theta);
  const ZetaKernel kernel = zeta_kernel(family.joint(theta), beta);
  int evaluations = 0;
  const auto q_at = [&](const std::vector<double>& t) {
    ++evaluations;
    return q_against_kernel(kernel, pY, family.joint(t));
  };

  std::vector<double> best = theta;
  double best_q = q_at(best);
  if (!std::isfinite(best_q))
    throw SupportViolation("em_step: Q undefined at the current theta");

  // coordinate ascent cycles until the budget runs out or a cycle stalls
  while (evaluations < inner.max_evaluations) {
    bool improved = false;
    for (int i = 0; i < family.dim && evaluations < inner.max_evaluations; ++i) {
      const Interval box = coordinate_interval(family, i, best[static_cast<std::size_t>(i)]);
      std::vector<double> probe = best;
      const auto line = [&](double v) {
        probe[static_cast<std::size_t>(i)] = v;
        return q_at(probe);
      };
      const int budget =
          std::max(8, (inner.max_evaluations - evaluations) / (2 * family.dim - i));
      const double candidate =
          golden_max(line, box.lo, box.hi, inner.tol, budget);
      const double q_candidate = line(candidate);
      if (std::isfinite(q_candidate) && q_candidate > best_q) {
        best[static_cast<std::size_t>(i)] = candidate;
        best_q = q_candidate;
        improved = true;
      }
    }
    if (!improved) break;
  }
  if (!std::isfinite(best_q))
    throw InnerOptimizerFailure("em_step: inner maximizer left the support");

  // Q(theta') >= Q(theta) by construction, so L cannot drop (up to
  // roundoff); fall back to theta if evaluation noise says otherwise
  const FiniteJoint at_theta = family.joint(theta);
  const FiniteJoint at_best = family.joint(best);
  if (log_generalized_likelihood(at_best, pY, beta) <
      log_generalized_likelihood(at_theta, pY, beta) - 1e-10)
    return theta;
  return best;
}

std::vector<double> l_beta_gradient_fd(const ParametricFamily& family,
                                       const std::vector<double>& theta,
                                       const ObservedMarginal& pY, double beta,
                                       double step) {
  std::vector<double> grad(theta.size(), 0.0);
  std::vector<double> probe = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double h = step * (1.0 + std::fabs(theta[i]));
    double lo = theta[i] - h, hi = theta[i] + h;
    if (!family.bounds.empty()) {
      lo = std::max(lo, family.bounds[i].lo);
      hi = std::min(hi, family.bounds[i].hi);
    }
    probe[i] = hi;
    const double f_hi = log_generalized_likelihood(family.joint(probe), pY, beta);
    probe[i] = lo;
    const double f_lo = log_generalized_likelihood(family.joint(probe), pY, beta);
    probe[i] = theta[i];
    grad[i] = (f_hi - f_lo) / (hi - lo);
  }
  return grad;
}

namespace {

double max_abs(const std::vector<double>& v) {
  double top = 0.0;
  for (double e : v) top = std::max(top, std::fabs(e));
  return top;
}

// Jacobi eigenvalue sweep for the small symmetric FD Hessian.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, int d) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) off += std::fabs(a[static_cast<std::size_t>(p) * d + q]);
    if (off < 1e-14) break;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) {
        const double apq = a[static_cast<std::size_t>(p) * d + q];
        if (std::fabs(apq) < 1e-300) continue;
        const double app = a[static_cast<std::size_t>(p) * d + p];
        const double aqq = a[static_cast<std::size_t>(q) * d + q];
        const double phi = 0.5 * std::atan2(2.0 * apq, aqq - app);
        const double c = std::cos(phi), s = std::sin(phi);
        for (int k = 0; k < d; ++k) {
          const double akp = a[static_cast<std::size_t>(k) * d + p];
          const double akq = a[static_cast<std::size_t>(k) * d + q];
          a[static_cast<std::size_t>(k) * d + p] = c * akp - s * akq;
          a[static_cast<std::size_t>(k) * d + q] = s * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          const double apk = a[static_cast<std::size_t>(p) * d + k];
          const double aqk = a[static_cast<std::size_t>(q) * d + k];
          a[static_cast<std::size_t>(p) * d + k] = c * apk - s * aqk;
          a[static_cast<std::size_t>(q) * d + k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> eig(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) eig[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k) * d + k];
  return eig;
}

std::vector<int> hessian_sign_report(const ParametricFamily& family,
                                     const std::vector<double>& theta,
                                     const ObservedMarginal& pY, double beta) {
  const int d = family.dim;
  const double h = 1e-4;
  const auto f = [&](const std::vector<double>& t) {
    return log_generalized_likelihood(family.joint(t), pY, beta);
  };
  const auto clamped = [&](std::vector<double> t) {
    if (!family.bounds.empty())
      for (int i = 0; i < d; ++i)
        t[static_cast<std::size_t>(i)] =
            std::min(std::max(t[static_cast<std::size_t>(i)], family.bounds[i].lo),
                     family.bounds[i].hi);
    return t;
  };
  std::vector<double> hess(static_cast<std::size_t>(d) * d, 0.0);
  const double f0 = f(theta);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      std::vector<double> tpp = theta, tpm = theta, tmp = theta, tmm = theta;
      tpp[static_cast<std::size_t>(i)] += h;
      tpp[static_cast<std::size_t>(j)] += h;
      tpm[static_cast<std::size_t>(i)] += h;
      tpm[static_cast<std::size_t>(j)] -= h;
      tmp[static_cast<std::size_t>(i)] -= h;
      tmp[static_cast<std::size_t>(j)] += h;
      tmm[static_cast<std::size_t>(i)] -= h;
      tmm[static_cast<std::size_t>(j)] -= h;
      double v;
      if (i == j) {
        v = (f(clamped(tpp)) - 2.0 * f0 + f(clamped(tmm))) / (4.0 * h * h);
      } else {
        v = (f(clamped(tpp)) - f(clamped(tpm)) - f(clamped(tmp)) +
             f(clamped(tmm))) /
            (4.0 * h * h);
      }
      hess[static_cast<std::size_t>(i) * d + j] = v;
      hess[static_cast<std::size_t>(j) * d + i] = v;
    }
  }
  const std::vector<double> eig = symmetric_eigenvalues(std::move(hess), d);
  double top = 1e-6;
  for (double e : eig) top = std::max(top, std::fabs(e));
  std::vector<int> signs;
  for (double e : eig) {
    if (e > 1e-6 * top)
      signs.push_back(+1);
    else if (e < -1e-6 * top)
      signs.push_back(-1);
    else
      signs.push_back(0);
  }
  return signs;
}

}  // namespace

EmTrace em_run(const ParametricFamily& family, std::vector<double> theta0,
               const ObservedMarginal& pY, double beta, const EmStop& stop) {
  check_theta(family, theta0);
  EmTrace trace{};
  trace.stop_reason = EmStopReason::kMaxIters;

  double l_current =
      log_generalized_likelihood(family.joint(theta0), pY, beta);
  std::vector<double> grad = l_beta_gradient_fd(family, theta0, pY, beta);
  trace.points.push_back({0, theta0, l_current, max_abs(grad)});

  int quiet_steps = 0;
  std::vector<double> theta = std::move(theta0);
  for (int k = 1; k <= stop.max_iters; ++k) {
    std::vector<double> next = em_step(family, theta, pY, beta);
    const double l_next =
        log_generalized_likelihood(family.joint(next), pY, beta);
    grad = l_beta_gradient_fd(family, next, pY, beta);
    const double grad_norm = max_abs(grad);
    trace.points.push_back({k, next, l_next, grad_norm});

    const bool unchanged = (next == theta);
    const double delta = l_next - l_current;
    quiet_steps = (std::fabs(delta) < stop.delta_tol) ? quiet_steps + 1 : 0;
    theta = std::move(next);
    l_current = l_next;

    // a detected fixed point stops immediately; otherwise require the
    // likelihood to be quiet three steps running and the gradient flat
    if ((unchanged || quiet_steps >= 3) && grad_norm <= 1e-6) {
      trace.stop_reason = EmStopReason::kDeltaTol;
      break;
    }
  }
  trace.hessian_signs = hessian_sign_report(family, theta, pY, beta);
  return trace;
}

void EmTrace::write_csv(std::ostream& os) const {
  if (points.empty()) return;
  os << "iter";
  for (std::size_t i = 0; i < points.front().theta.size(); ++i)
    os << ",theta" << i;
  os << ",L_beta,grad_norm\n";
  for (const EmTracePoint& pt : points) {
    os << pt.iter;
    for (double t : pt.theta) os << ',' << fmt17(t);
    os << ',' << fmt17(pt.l_beta) << ',' << fmt17(pt.grad_norm) << '\n';
  }
}

}  // namespace genlik
