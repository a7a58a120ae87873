#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "cede/contract.hpp"
#include "cede/normal.hpp"

namespace cede {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Non-negative annual loss models with consistent cdf / survival / quantile
// access. Quantiles follow the lower (left-continuous) convention
// q(p) = inf{x : F(x) >= p}, matching VaR as an infimum; cdfs are
// right-continuous. Values are immutable after construction.
class LossDistribution {
 public:
  struct Empirical {
    std::vector<double> values;   // strictly increasing
    std::vector<double> weights;  // positive, sum to 1 within 1e-12
    std::vector<double> cum;      // running sums of weights
  };
  struct Exponential {
    double rate;
  };
  struct Lognormal {
    double mu, sigma;
  };
  struct Uniform {
    double lo, hi;
  };
  struct Truncated {
    std::shared_ptr<const LossDistribution> inner;
    double cap;
  };
  // Law of f(X) for a contract f and inner law of X.
  struct Transformed {
    std::shared_ptr<const LossDistribution> inner;
    IndemnificationFunction contract;
  };

  using Variant = std::variant<Empirical, Exponential, Lognormal, Uniform, Truncated, Transformed>;

  static LossDistribution empirical(std::vector<std::pair<double, double>> points) {
    if (points.empty()) throw std::invalid_argument("empirical: no atoms");
    std::sort(points.begin(), points.end());
    Empirical e;
    for (const auto& [x, w] : points) {
      if (!(x >= 0.0) || !std::isfinite(x))
        throw std::invalid_argument("empirical: atoms must be non-negative and finite");
      if (!(w > 0.0)) throw std::invalid_argument("empirical: weights must be positive");
      // Atoms within 1e-12 of each other are merged.
      if (!e.values.empty() && x - e.values.back() <= 1e-12)
        e.weights.back() += w;
      else {
        e.values.push_back(x);
        e.weights.push_back(w);
      }
    }
    double total = 0.0;
    e.cum.reserve(e.weights.size());
    for (double w : e.weights) {
      total += w;
      e.cum.push_back(total);
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("empirical: weights must sum to 1");
    return LossDistribution(Variant(std::move(e)));
  }

  static LossDistribution exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be positive");
    return LossDistribution(Variant(Exponential{rate}));
  }

  static LossDistribution lognormal(double mu, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("lognormal: sigma must be positive");
    return LossDistribution(Variant(Lognormal{mu, sigma}));
  }

  static LossDistribution uniform(double lo, double hi) {
    if (!(lo >= 0.0)) throw std::invalid_argument("uniform: lo must be non-negative");
    if (!(hi > lo)) throw std::invalid_argument("uniform: hi must exceed lo");
    return LossDistribution(Variant(Uniform{lo, hi}));
  }

  double cdf(double x) const {
    return std::visit(
        [x](const auto& d) -> double { return cdf_impl(d, x); }, v_);
  }

  double survival(double x) const { return 1.0 - cdf(x); }

  double quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::domain_error("quantile: probability outside [0,1]");
    return std::visit(
        [p](const auto& d) -> double { return quantile_impl(d, p); }, v_);
  }

  // quantile(1 - omt) evaluated from the survival side, so deep tails do not
  // lose precision to the subtraction 1 - omt.
  double quantile_tail(double omt) const {
    if (!(omt >= 0.0 && omt <= 1.0))
      throw std::domain_error("quantile_tail: probability outside [0,1]");
    return std::visit(
        [omt](const auto& d) -> double { return quantile_tail_impl(d, omt); }, v_);
  }

  std::pair<double, double> support() const {
    return std::visit([](const auto& d) { return support_impl(d); }, v_);
  }

  // Distribution of min(X, cap).
  LossDistribution truncated(double cap) const {
    if (!(cap > 0.0)) throw std::domain_error("truncate: cap must be positive");
    if (const auto* e = std::get_if<Empirical>(&v_)) {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t i = 0; i < e->values.size(); ++i)
        pts.emplace_back(std::min(e->values[i], cap), e->weights[i]);
      return empirical(std::move(pts));
    }
    return LossDistribution(
        Variant(Truncated{std::make_shared<LossDistribution>(*this), cap}));
  }

  // Empirical approximation on midpoint quantile levels {(i+0.5)/n * p_max},
  // each with weight p_max/n, plus a terminal atom holding the residual tail
  // mass at quantile(p_max) when p_max < 1.
  LossDistribution discretized(std::size_t n_points, double p_max) const {
    if (n_points < 2) throw std::invalid_argument("discretize: need at least 2 points");
    if (!(p_max > 0.0 && p_max <= 1.0))
      throw std::invalid_argument("discretize: p_max outside (0,1]");
    std::vector<std::pair<double, double>> pts;
    pts.reserve(n_points + 1);
    const double w = p_max / static_cast<double>(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
      double level = (static_cast<double>(i) + 0.5) / static_cast<double>(n_points) * p_max;
      pts.emplace_back(quantile(level), w);
    }
    if (p_max < 1.0) pts.emplace_back(quantile(p_max), 1.0 - p_max);
    return empirical(std::move(pts));
  }

  // Probability levels where the quantile function is non-smooth (truncation
  // caps, contract breakpoints of transformed laws). Quadrature over the unit
  // interval must break at these points or it can miss narrow features.
  std::vector<double> quantile_kinks() const {
    std::vector<double> out;
    if (const auto* t = std::get_if<Truncated>(&v_)) {
      out = t->inner->quantile_kinks();
      out.push_back(t->inner->cdf(t->cap));
    } else if (const auto* tr = std::get_if<Transformed>(&v_)) {
      out = tr->inner->quantile_kinks();
      for (double b : tr->contract.breakpoints()) out.push_back(tr->inner->cdf(b));
    } else if (const auto* e = std::get_if<Empirical>(&v_)) {
      out = e->cum;
    }
    return out;
  }

  // Loss-axis points where the cdf jumps or kinks.
  std::vector<double> loss_axis_kinks() const {
    std::vector<double> out;
    if (const auto* t = std::get_if<Truncated>(&v_)) {
      for (double k : t->inner->loss_axis_kinks())
        if (k < t->cap) out.push_back(k);
      out.push_back(t->cap);
    } else if (const auto* tr = std::get_if<Transformed>(&v_)) {
      for (double k : tr->inner->loss_axis_kinks()) out.push_back(tr->contract(k));
      for (double b : tr->contract.breakpoints()) out.push_back(tr->contract(b));
    } else if (const auto* e = std::get_if<Empirical>(&v_)) {
      out = e->values;
    }
    return out;
  }

  bool is_empirical() const { return std::holds_alternative<Empirical>(v_); }
  const Empirical& as_empirical() const { return std::get<Empirical>(v_); }
  const Variant& variant() const { return v_; }

 private:
  explicit LossDistribution(Variant v) : v_(std::move(v)) {}

  friend LossDistribution push_forward(const IndemnificationFunction&, const LossDistribution&);

  // --- cdf ---
  static double cdf_impl(const Empirical& d, double x) {
    auto it = std::upper_bound(d.values.begin(), d.values.end(), x);
    if (it == d.values.begin()) return 0.0;
    return d.cum[static_cast<std::size_t>(it - d.values.begin()) - 1];
  }
  static double cdf_impl(const Exponential& d, double x) {
    if (x <= 0.0) return 0.0;
    return -std::expm1(-d.rate * x);
  }
  static double cdf_impl(const Lognormal& d, double x) {
    if (x <= 0.0) return 0.0;
    return norm_cdf((std::log(x) - d.mu) / d.sigma);
  }
  static double cdf_impl(const Uniform& d, double x) {
    if (x <= d.lo) return 0.0;
    if (x >= d.hi) return 1.0;
    return (x - d.lo) / (d.hi - d.lo);
  }
  static double cdf_impl(const Truncated& d, double x) {
    if (x >= d.cap) return 1.0;
    return d.inner->cdf(x);
  }
  static double cdf_impl(const Transformed& d, double x) {
    double pre = d.contract.upper_inverse(x);
    if (std::isinf(pre)) return pre > 0.0 ? 1.0 : 0.0;
    return d.inner->cdf(pre);
  }

  // --- quantile ---
  static double quantile_impl(const Empirical& d, double p) {
    if (p <= 0.0) return d.values.front();
    auto it = std::lower_bound(d.cum.begin(), d.cum.end(), p);
    if (it == d.cum.end()) return d.values.back();
    return d.values[static_cast<std::size_t>(it - d.cum.begin())];
  }
  static double quantile_impl(const Exponential& d, double p) {
    if (p >= 1.0) return kInf;
    return -std::log1p(-p) / d.rate;
  }
  static double quantile_impl(const Lognormal& d, double p) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return kInf;
    return std::exp(d.mu + d.sigma * norm_cdf_inv(p));
  }
  static double quantile_impl(const Uniform& d, double p) {
    return d.lo + p * (d.hi - d.lo);
  }
  static double quantile_impl(const Truncated& d, double p) {
    return std::min(d.inner->quantile(p), d.cap);
  }
  static double quantile_impl(const Transformed& d, double p) {
    // VaR commutes with non-decreasing functions.
    return d.contract(d.inner->quantile(p));
  }

  // --- quantile from the tail side ---
  static double quantile_tail_impl(const Empirical& d, double omt) {
    return quantile_impl(d, std::min(1.0, 1.0 - omt));
  }
  static double quantile_tail_impl(const Exponential& d, double omt) {
    return -std::log(omt) / d.rate;
  }
  static double quantile_tail_impl(const Lognormal& d, double omt) {
    if (omt <= 0.0) return kInf;
    if (omt >= 1.0) return 0.0;
    return std::exp(d.mu - d.sigma * norm_cdf_inv(omt));
  }
  static double quantile_tail_impl(const Uniform& d, double omt) {
    return d.hi - omt * (d.hi - d.lo);
  }
  static double quantile_tail_impl(const Truncated& d, double omt) {
    return std::min(d.inner->quantile_tail(omt), d.cap);
  }
  static double quantile_tail_impl(const Transformed& d, double omt) {
    return d.contract(d.inner->quantile_tail(omt));
  }

  // --- support ---
  static std::pair<double, double> support_impl(const Empirical& d) {
    return {d.values.front(), d.values.back()};
  }
  static std::pair<double, double> support_impl(const Exponential&) { return {0.0, kInf}; }
  static std::pair<double, double> support_impl(const Lognormal&) { return {0.0, kInf}; }
  static std::pair<double, double> support_impl(const Uniform& d) { return {d.lo, d.hi}; }
  static std::pair<double, double> support_impl(const Truncated& d) {
    auto [lo, hi] = d.inner->support();
    return {std::min(lo, d.cap), std::min(hi, d.cap)};
  }
  static std::pair<double, double> support_impl(const Transformed& d) {
    auto [lo, hi] = d.inner->support();
    return {d.contract(lo), d.contract(hi)};
  }

  Variant v_;
};

// Law of f(X) when X ~ d. Exact on empirical distributions; otherwise a
// transformed view whose quantile function is f composed with the inner one.
inline LossDistribution push_forward(const IndemnificationFunction& f,
                                     const LossDistribution& d) {
  if (d.is_empirical()) {
    const auto& e = d.as_empirical();
    // Map atoms; equal images merge inside the constructor. f is
    // non-decreasing, so images arrive sorted and merging preserves the
    // running cumulative weights exactly.
    std::vector<std::pair<double, double>> pts;
    pts.reserve(e.values.size());
    for (std::size_t i = 0; i < e.values.size(); ++i)
      pts.emplace_back(f(e.values[i]), e.weights[i]);
    return LossDistribution::empirical(std::move(pts));
  }
  return LossDistribution(LossDistribution::Variant(LossDistribution::Transformed{
      std::make_shared<LossDistribution>(d), f}));
}

}  // namespace cede
