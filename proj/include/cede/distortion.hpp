#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cede/distribution.hpp"
#include "cede/normal.hpp"
#include "cede/quadrature.hpp"

namespace cede {

// Distortion functions Pi: [0,1] -> [0,1], non-decreasing with Pi(0)=0 and
// Pi(1)=1, evaluated with the right-continuous convention at jumps. The dual
// view g(x) = 1 - Pi(1-x) acts on survival probabilities. Each function
// decomposes into an integrable density part plus finitely many atoms.

struct PiAtom {
  double location;
  double mass;
};

class DistortionFunction {
 public:
  enum class Kind { ExpectedValue, VaRStep, CVaRRamp, Wang, ProportionalHazard, PiecewiseLinear };

  static DistortionFunction expected_value() { return DistortionFunction(Kind::ExpectedValue); }

  // Pi(t) = 1_{[alpha,1]}(t); the atom sits at alpha and Pi(alpha) = 1.
  static DistortionFunction var_step(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("var_step: level must lie in (0,1)");
    DistortionFunction f(Kind::VaRStep);
    f.a_ = alpha;
    return f;
  }

  // Pi(t) = (t - alpha)/(1 - alpha) on [alpha,1], zero before.
  static DistortionFunction cvar_ramp(double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0))
      throw std::invalid_argument("cvar_ramp: level must lie in [0,1)");
    DistortionFunction f(Kind::CVaRRamp);
    f.a_ = alpha;
    return f;
  }

  // Pi(t) = Phi(Phi^{-1}(t) - beta), the quantile-side view of
  // g(x) = Phi(Phi^{-1}(x) + beta). Convex for beta >= 0.
  static DistortionFunction wang(double beta) {
    if (!std::isfinite(beta)) throw std::invalid_argument("wang: shift must be finite");
    DistortionFunction f(Kind::Wang);
    f.a_ = beta;
    return f;
  }

  // g(x) = x^c, i.e. Pi(t) = 1 - (1-t)^c, c in (0,1].
  static DistortionFunction proportional_hazard(double c) {
    if (!(c > 0.0 && c <= 1.0))
      throw std::invalid_argument("proportional_hazard: exponent must lie in (0,1]");
    DistortionFunction f(Kind::ProportionalHazard);
    f.a_ = c;
    return f;
  }

  // Knots (t, Pi(t)) with non-decreasing coordinates; a repeated t encodes a
  // jump (atom) at that location. Must run from (0,0) to (1,1).
  static DistortionFunction piecewise_linear(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2) throw std::invalid_argument("piecewise_linear: need at least 2 knots");
    for (std::size_t i = 1; i < knots.size(); ++i) {
      if (knots[i].first < knots[i - 1].first || knots[i].second < knots[i - 1].second)
        throw std::invalid_argument("piecewise_linear: knots must be non-decreasing");
      if (knots[i].first == knots[i - 1].first && knots[i].second == knots[i - 1].second)
        throw std::invalid_argument("piecewise_linear: duplicate knot");
    }
    if (knots.front() != std::pair<double, double>(0.0, 0.0))
      throw std::invalid_argument("piecewise_linear: Pi(0) must be 0");
    if (knots.back().first != 1.0 || knots.back().second != 1.0)
      throw std::invalid_argument("piecewise_linear: Pi(1) must be 1");
    if (knots[1].first == 0.0)
      throw std::invalid_argument("piecewise_linear: jump at 0 violates Pi(0)=0");
    DistortionFunction f(Kind::PiecewiseLinear);
    f.knots_ = std::move(knots);
    return f;
  }

  Kind kind() const { return kind_; }
  double level() const { return a_; }  // alpha / beta / c, by kind
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

  // Pi(t), right-continuous. Probabilities a hair outside [0,1] (running
  // sums of empirical weights) are clamped.
  double pi(double t) const {
    if (!(t >= -1e-9 && t <= 1.0 + 1e-9))
      throw std::domain_error("distortion: argument outside [0,1]");
    t = std::min(1.0, std::max(0.0, t));
    switch (kind_) {
      case Kind::ExpectedValue:
        return t;
      case Kind::VaRStep:
        return t >= a_ ? 1.0 : 0.0;
      case Kind::CVaRRamp:
        return t >= a_ ? (t - a_) / (1.0 - a_) : 0.0;
      case Kind::Wang:
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 1.0;
        return norm_cdf(norm_cdf_inv(t) - a_);
      case Kind::ProportionalHazard:
        return 1.0 - std::pow(1.0 - t, a_);
      case Kind::PiecewiseLinear: {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                   [](double x, const auto& k) { return x < k.first; });
        std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
        if (knots_[i].first == t || i + 1 == knots_.size()) return knots_[i].second;
        const auto& [t0, v0] = knots_[i];
        const auto& [t1, v1] = knots_[i + 1];
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
      }
    }
    return 0.0;
  }

  // 1 - Pi(1 - omt), computed without forming 1-omt where it matters.
  double pi_tail(double omt) const {
    if (!(omt >= -1e-9 && omt <= 1.0 + 1e-9))
      throw std::domain_error("distortion: argument outside [0,1]");
    omt = std::min(1.0, std::max(0.0, omt));
    switch (kind_) {
      case Kind::ExpectedValue:
        return omt;
      case Kind::VaRStep:
        return omt <= 1.0 - a_ ? 0.0 : 1.0;
      case Kind::CVaRRamp:
        return omt <= 1.0 - a_ ? omt / (1.0 - a_) : 1.0;
      case Kind::Wang:
        if (omt <= 0.0) return 0.0;
        if (omt >= 1.0) return 1.0;
        return norm_cdf(norm_cdf_inv(omt) + a_);
      case Kind::ProportionalHazard:
        return std::pow(omt, a_);
      case Kind::PiecewiseLinear:
        return 1.0 - pi(1.0 - omt);
    }
    return 0.0;
  }

  // Survival-side view g(x) = 1 - Pi(1-x); left-continuous at jumps.
  double g(double x) const { return pi_tail(x); }

  // Density part of dPi (excludes atoms).
  double density(double t) const {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    switch (kind_) {
      case Kind::ExpectedValue:
        return 1.0;
      case Kind::VaRStep:
        return 0.0;
      case Kind::CVaRRamp:
        return t >= a_ ? 1.0 / (1.0 - a_) : 0.0;
      case Kind::Wang: {
        double z = norm_cdf_inv(t);
        return std::exp(a_ * z - 0.5 * a_ * a_);
      }
      case Kind::ProportionalHazard:
        return a_ * std::pow(1.0 - t, a_ - 1.0);
      case Kind::PiecewiseLinear: {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                   [](double x, const auto& k) { return x < k.first; });
        std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
        if (i + 1 == knots_.size()) return 0.0;
        double dt = knots_[i + 1].first - knots_[i].first;
        if (dt == 0.0) return 0.0;  // at an atom location; measure zero
        return (knots_[i + 1].second - knots_[i].second) / dt;
      }
    }
    return 0.0;
  }

  // Density evaluated at t = 1 - omt, stable near the right endpoint.
  double density_tail(double omt) const {
    if (omt <= 0.0 || omt >= 1.0) return 0.0;
    switch (kind_) {
      case Kind::ExpectedValue:
        return 1.0;
      case Kind::VaRStep:
        return 0.0;
      case Kind::CVaRRamp:
        return omt <= 1.0 - a_ ? 1.0 / (1.0 - a_) : 0.0;
      case Kind::Wang: {
        double z = -norm_cdf_inv(omt);
        return std::exp(a_ * z - 0.5 * a_ * a_);
      }
      case Kind::ProportionalHazard:
        return a_ * std::pow(omt, a_ - 1.0);
      case Kind::PiecewiseLinear:
        return density(1.0 - omt);
    }
    return 0.0;
  }

  std::vector<PiAtom> atoms() const {
    switch (kind_) {
      case Kind::VaRStep:
        return {{a_, 1.0}};
      case Kind::PiecewiseLinear: {
        std::vector<PiAtom> out;
        for (std::size_t i = 1; i < knots_.size(); ++i)
          if (knots_[i].first == knots_[i - 1].first)
            out.push_back({knots_[i].first, knots_[i].second - knots_[i - 1].second});
        return out;
      }
      default:
        return {};
    }
  }

  // Interior locations where the density or Pi itself is non-smooth.
  std::vector<double> kink_points() const {
    switch (kind_) {
      case Kind::VaRStep:
      case Kind::CVaRRamp:
        return {a_};
      case Kind::PiecewiseLinear: {
        std::vector<double> out;
        for (std::size_t i = 1; i + 1 < knots_.size(); ++i) out.push_back(knots_[i].first);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
      }
      default:
        return {};
    }
  }

  bool density_singular_near_one() const {
    return (kind_ == Kind::ProportionalHazard && a_ < 1.0) || (kind_ == Kind::Wang && a_ > 0.0);
  }
  bool density_singular_near_zero() const { return kind_ == Kind::Wang && a_ < 0.0; }

  std::string name() const {
    switch (kind_) {
      case Kind::ExpectedValue: return "expected-value";
      case Kind::VaRStep: return "var(" + std::to_string(a_) + ")";
      case Kind::CVaRRamp: return "cvar(" + std::to_string(a_) + ")";
      case Kind::Wang: return "wang(" + std::to_string(a_) + ")";
      case Kind::ProportionalHazard: return "proportional-hazard(" + std::to_string(a_) + ")";
      case Kind::PiecewiseLinear: return "piecewise-linear";
    }
    return "";
  }

 private:
  explicit DistortionFunction(Kind k) : kind_(k) {}
  Kind kind_;
  double a_ = 0.0;
  std::vector<std::pair<double, double>> knots_;
};

// Survival-side view of a distortion, as produced by to_g. from_g recovers
// the underlying quantile-side function exactly.
struct SurvivalDistortion {
  DistortionFunction base;
  double operator()(double x) const { return base.g(x); }
};

inline SurvivalDistortion to_g(const DistortionFunction& pi) { return SurvivalDistortion{pi}; }

inline DistortionFunction from_g(const SurvivalDistortion& g) {
  if (std::abs(g(0.0)) > 1e-12 || std::abs(g(1.0) - 1.0) > 1e-12)
    throw std::invalid_argument("from_g: endpoint conditions g(0)=0, g(1)=1 violated");
  return g.base;
}

// A distortion functional with a role tag. Premiums and risk measures share
// one evaluation; the tag only records how the number is used.
struct RiskFunctional {
  enum class Role { Measure, Premium };
  DistortionFunction distortion;
  Role role = Role::Measure;

  static RiskFunctional measure(DistortionFunction d) {
    return RiskFunctional{std::move(d), Role::Measure};
  }
  static RiskFunctional premium(DistortionFunction d) {
    return RiskFunctional{std::move(d), Role::Premium};
  }
};

struct EvalOptions {
  double tail_eps = 1e-10;  // unbounded losses are capped at quantile(1 - tail_eps)
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
};

class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// Sum of adaptive integrals over [u0, u0+8), [u0+8, ...), stopping once two
// consecutive blocks are negligible. Integrands decay at least exponentially
// in u for every supported distortion/loss pair.
template <class F>
double integrate_blocks(F&& f, double u0, const EvalOptions& opts) {
  double acc = 0.0;
  int quiet = 0;
  const double width = 8.0;
  for (double a = u0; a < 760.0; a += width) {
    double piece = integrate(f, a, a + width, opts.rel_tol, opts.abs_tol);
    acc += piece;
    if (std::abs(piece) <= std::max(opts.abs_tol, 0.125 * opts.rel_tol * std::abs(acc))) {
      if (++quiet >= 2) break;
    } else {
      quiet = 0;
    }
  }
  return acc;
}

inline double empirical_risk_sum(const DistortionFunction& pi,
                                 const LossDistribution::Empirical& e) {
  double acc = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    double cur = pi.pi(std::min(e.cum[i], 1.0));
    acc += e.values[i] * (cur - prev);
    prev = cur;
  }
  return acc;
}

}  // namespace detail

// rho(X) = sum_i m_i q(t_i) + int_0^1 q(t) phi(t) dt, exact on empirical
// losses. Unbounded losses evaluate the capped risk Lambda(X ^ q(1-tail_eps)),
// the object the regularity condition (increasing caps) converges through.
inline double risk_value(const RiskFunctional& lambda, const LossDistribution& d,
                         const EvalOptions& opts = {}) {
  const DistortionFunction& pi = lambda.distortion;
  if (d.is_empirical()) return detail::empirical_risk_sum(pi, d.as_empirical());

  auto [lo, hi] = d.support();
  const bool unbounded = std::isinf(hi);
  const double cap = unbounded ? d.quantile_tail(opts.tail_eps) : hi;

  double acc = 0.0;
  for (const PiAtom& atom : pi.atoms()) {
    if (atom.location >= 1.0 && unbounded)
      throw DivergenceError("risk integral diverges: distortion " + pi.name() +
                            " places mass at probability 1 on an unbounded loss tail");
    double q = atom.location >= 1.0 ? hi : d.quantile(atom.location);
    acc += atom.mass * std::min(q, cap);
  }

  // Segment the unit interval at kinks of the distortion density and of the
  // quantile function; 1/2 is always a boundary so the endpoint treatments
  // below never collide.
  std::vector<double> bounds{0.0, 0.5, 1.0};
  for (double k : pi.kink_points())
    if (k > 0.0 && k < 1.0) bounds.push_back(k);
  for (double k : d.quantile_kinks())
    if (k > 0.0 && k < 1.0) bounds.push_back(k);
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  try {
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
      const double s = bounds[i], e = bounds[i + 1];
      if (e == 1.0) {
        // Substitute omt = 1-t = exp(-u); stable against cancellation and the
        // density singularities of Wang / proportional-hazard at t -> 1.
        auto f = [&](double u) {
          double omt = std::exp(-u);
          return std::min(d.quantile_tail(omt), cap) * pi.density_tail(omt) * omt;
        };
        const double u0 = -std::log1p(-s);
        if (unbounded) {
          acc += integrate(f, u0, -std::log(opts.tail_eps), opts.rel_tol, opts.abs_tol);
          acc += cap * pi.pi_tail(opts.tail_eps);
        } else {
          acc += detail::integrate_blocks(f, u0, opts);
        }
      } else if (s == 0.0 && pi.density_singular_near_zero()) {
        auto f = [&](double u) {
          double t = std::exp(-u);
          return d.quantile(t) * pi.density(t) * t;
        };
        acc += detail::integrate_blocks(f, -std::log(e), opts);
      } else {
        acc += integrate([&](double t) { return d.quantile(t) * pi.density(t); }, s, e,
                         opts.rel_tol, opts.abs_tol);
      }
    }
  } catch (const std::runtime_error& err) {
    throw DivergenceError("risk integral failed for distortion " + pi.name() +
                          " against the loss tail: " + err.what());
  }
  return acc;
}

// rho(X) = int_0^inf g(S_X(t)) dt over the loss axis; agrees with risk_value
// up to quadrature error (both evaluate the same capped object).
inline double risk_value_survival_form(const RiskFunctional& lambda, const LossDistribution& d,
                                       const EvalOptions& opts = {}) {
  const DistortionFunction& pi = lambda.distortion;
  if (d.is_empirical()) {
    const auto& e = d.as_empirical();
    double acc = e.values.front();  // g(1) = 1 below the smallest atom
    for (std::size_t i = 0; i + 1 < e.values.size(); ++i)
      acc += (e.values[i + 1] - e.values[i]) * pi.pi_tail(1.0 - std::min(e.cum[i], 1.0));
    return acc;
  }

  auto [lo, hi] = d.support();
  const bool unbounded = std::isinf(hi);
  const double cap = unbounded ? d.quantile_tail(opts.tail_eps) : hi;
  for (const PiAtom& atom : pi.atoms())
    if (atom.location >= 1.0 && unbounded)
      throw DivergenceError("risk integral diverges: distortion " + pi.name() +
                            " places mass at probability 1 on an unbounded loss tail");

  // Split where g(S_X(.)) jumps or kinks: at quantiles of the distortion's
  // atom and kink locations.
  std::vector<double> bounds{0.0, cap};
  if (lo > 0.0 && lo < cap) bounds.push_back(lo);
  auto add_quantile_of = [&](double t) {
    if (t <= 0.0 || t >= 1.0) return;
    double s = d.quantile(t);
    if (s > 0.0 && s < cap) bounds.push_back(s);
  };
  for (const PiAtom& atom : pi.atoms()) add_quantile_of(atom.location);
  for (double k : pi.kink_points()) add_quantile_of(k);
  for (double s : d.loss_axis_kinks())
    if (s > 0.0 && s < cap) bounds.push_back(s);
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  double acc = 0.0;
  try {
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i)
      acc += integrate([&](double s) { return pi.pi_tail(d.survival(s)); }, bounds[i],
                       bounds[i + 1], opts.rel_tol, opts.abs_tol);
  } catch (const std::runtime_error& err) {
    throw DivergenceError("risk integral failed for distortion " + pi.name() +
                          " against the loss tail: " + err.what());
  }
  return acc;
}

inline double mean(const LossDistribution& d, const EvalOptions& opts = {}) {
  return risk_value(RiskFunctional::measure(DistortionFunction::expected_value()), d, opts);
}

// Evaluates Lambda(X ^ cap) along an increasing ladder of caps, the
// regularity condition distortion pairs must satisfy for the solver.
struct RegularityReport {
  std::vector<std::pair<double, double>> ladder;  // (cap, value)
  double limit_estimate = 0.0;
  bool converged = false;
};

inline RegularityReport check_regularity(const RiskFunctional& lambda, const LossDistribution& d,
                                         const std::vector<double>& caps,
                                         const EvalOptions& opts = {}) {
  if (caps.empty()) throw std::invalid_argument("check_regularity: no caps");
  for (std::size_t i = 0; i < caps.size(); ++i) {
    if (!(caps[i] > 0.0)) throw std::invalid_argument("check_regularity: caps must be positive");
    if (i > 0 && !(caps[i] > caps[i - 1]))
      throw std::invalid_argument("check_regularity: caps must be increasing");
  }
  RegularityReport report;
  for (double cap : caps)
    report.ladder.emplace_back(cap, risk_value(lambda, d.truncated(cap), opts));
  report.limit_estimate = risk_value(lambda, d, opts);
  if (report.ladder.size() >= 2) {
    double last = report.ladder.back().second;
    double prev = report.ladder[report.ladder.size() - 2].second;
    report.converged = std::abs(last - prev) <= 1e-6 * (1.0 + std::abs(last));
  } else {
    report.converged = true;
  }
  return report;
}

}  // namespace cede
