#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "cede/solver.hpp"

namespace cede {

// Closed-form stop-loss solvers for the ceding problem under VaR and CVaR
// measures with a strictly increasing premium distortion and strictly
// increasing loss cdf. They serve both as fast paths and as independent
// checks of the general sign-rule solver.

struct StopLossParams {
  double a_star = 0.0;   // attachment: Pi2(F(a*)) = rho/(1+rho)
  double d_star = 0.0;   // F(d*) = rho/(1+rho)
  double limit = std::numeric_limits<double>::infinity();
  std::optional<double> b_star;  // CVaR case: upper coverage level in probability
  double alpha = 0.0;
  double rho = 0.0;

  IndemnificationFunction contract() const { return stop_loss(a_star, limit); }
};

namespace detail {

inline void require_continuous_loss(const LossDistribution& d) {
  if (d.is_empirical())
    throw std::invalid_argument(
        "closed-form solver requires a strictly increasing loss cdf; "
        "use the general solver for empirical losses");
}

inline void require_strictly_increasing(const DistortionFunction& pi2) {
  if (!pi2.atoms().empty())
    throw std::invalid_argument("closed-form solver: premium distortion must be "
                                "strictly increasing (atoms present)");
  const int n = 512;
  double prev = 0.0;
  for (int i = 1; i <= n; ++i) {
    double cur = pi2.pi(static_cast<double>(i) / n);
    if (!(cur > prev))
      throw std::invalid_argument("closed-form solver: premium distortion must be "
                                  "strictly increasing");
    prev = cur;
  }
}

inline void require_convex(const DistortionFunction& pi2) {
  const int n = 512;
  for (int i = 1; i < n; ++i) {
    double a = pi2.pi(static_cast<double>(i - 1) / n);
    double b = pi2.pi(static_cast<double>(i) / n);
    double c = pi2.pi(static_cast<double>(i + 1) / n);
    if (b - a > c - b + 1e-9)
      throw std::invalid_argument("closed-form solver: premium distortion must be convex");
  }
}

// Smallest u in [lo, hi] with f(u) >= 0, given f(lo) < 0 <= f(hi); bisection
// to absolute tolerance in probability.
template <class F>
double bisect_root(F&& f, double lo, double hi, double tol = 1e-12) {
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace detail

// Ceding measure VaR_alpha: coverage (a*, F^{-1}(alpha)) with
// Pi2(F(a*)) = rho/(1+rho) and L = F^{-1}(alpha) - a*.
inline StopLossParams stoploss_var(double alpha, double rho,
                                   const DistortionFunction& premium_distortion,
                                   const LossDistribution& d) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("stoploss_var: alpha must lie in (0,1)");
  if (!(rho >= 0.0)) throw std::invalid_argument("stoploss_var: rho must be >= 0");
  detail::require_continuous_loss(d);
  detail::require_strictly_increasing(premium_distortion);

  const double target = rho / (1.0 + rho);
  if (!(target < premium_distortion.pi(alpha)))
    throw std::domain_error(
        "stoploss_var: assumption rho/(1+rho) < Pi2(alpha) violated (rho/(1+rho) = " +
        std::to_string(target) + ", Pi2(alpha) = " +
        std::to_string(premium_distortion.pi(alpha)) +
        "); the optimal contract is not an interior stop-loss here");

  StopLossParams out;
  out.alpha = alpha;
  out.rho = rho;
  double u_star =
      target == 0.0
          ? 0.0
          : detail::bisect_root(
                [&](double u) { return premium_distortion.pi(u) - target; }, 0.0, alpha);
  out.a_star = d.quantile(u_star);
  out.d_star = d.quantile(target);
  out.limit = d.quantile(alpha) - out.a_star;
  return out;
}

// Ceding measure CVaR_alpha with convex premium distortion: coverage
// (a*, F^{-1}(b*)) where b* is the smallest root in (alpha, 1] of
// rho + (u-alpha)/(1-alpha) - (1+rho)*Pi2(u). When the expression stays
// negative on the interior, b* = 1 and coverage runs to the essential
// supremum.
inline StopLossParams stoploss_cvar(double alpha, double rho,
                                    const DistortionFunction& premium_distortion,
                                    const LossDistribution& d) {
  detail::require_convex(premium_distortion);
  StopLossParams out = stoploss_var(alpha, rho, premium_distortion, d);
  const double L_var = out.limit;

  auto branch = [&](double u) {
    return rho + (u - alpha) / (1.0 - alpha) - (1.0 + rho) * premium_distortion.pi(u);
  };
  const int scan = 4096;
  double b_star = 1.0;
  double prev = alpha;
  for (int j = 1; j < scan; ++j) {
    double u = alpha + (1.0 - alpha) * static_cast<double>(j) / scan;
    if (branch(u) >= 0.0) {
      b_star = detail::bisect_root(branch, prev, u);
      break;
    }
    prev = u;
  }
  out.b_star = b_star;
  out.limit = d.quantile(b_star) - out.a_star;
  if (!(b_star >= alpha) || out.limit < L_var - 1e-9)
    throw std::logic_error("stoploss_cvar: coverage shorter than the VaR case");
  return out;
}

// The VaR-vs-VaR market: the ceding company measures with VaR_alpha, the
// reinsurer with VaR_beta, and each side's premium is priced with the other
// party's distortion. For alpha < beta the ceding problem yields the zero
// contract; for alpha > beta the reinsurer problem yields full transfer.
inline Solution var_vs_var(double alpha, double beta, double rho, const LossDistribution& d,
                           const SolverOptions& opts = {}) {
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("var_vs_var: levels must lie in (0,1)");
  ReinsuranceProblem p =
      alpha > beta
          ? build_reinsurer(rho,
                            RiskFunctional::measure(DistortionFunction::var_step(beta)),
                            RiskFunctional::premium(DistortionFunction::var_step(alpha)), d,
                            opts.eval)
          : build_ceding(rho, RiskFunctional::measure(DistortionFunction::var_step(alpha)),
                         RiskFunctional::premium(DistortionFunction::var_step(beta)), d);
  return solve(p, opts);
}

}  // namespace cede
