#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cede {

// Ceded-loss contracts are piecewise-linear functions f: [0,inf) -> [0,inf)
// with f(0)=0 and all slopes in [0,1], so that both the ceded loss f(x) and
// the retained loss x-f(x) are non-decreasing. Their a.e. derivatives form
// the space of marginal indemnification functions: step functions with
// values in [0,1]. Both classes are exact objects, never sampled arrays.

constexpr double kSlopeTol = 1e-12;

// Step function on [0,inf): value values_[i] on [breakpoints_[i], breakpoints_[i+1]),
// and values_.back() on the unbounded last interval. breakpoints_[0] == 0.
class MarginalIndemnification {
 public:
  MarginalIndemnification(std::vector<double> breakpoints, std::vector<double> values)
      : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    if (breakpoints_.empty() || breakpoints_.front() != 0.0)
      throw std::invalid_argument("marginal: breakpoints must start at 0");
    if (breakpoints_.size() != values_.size())
      throw std::invalid_argument("marginal: one value per breakpoint required");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i)
      if (!(breakpoints_[i] > breakpoints_[i - 1]))
        throw std::invalid_argument("marginal: breakpoints must be strictly increasing");
    for (double v : values_)
      if (!(v >= -kSlopeTol && v <= 1.0 + kSlopeTol))
        throw std::invalid_argument("marginal: values must lie in [0,1]");
    for (double& v : values_) v = std::min(1.0, std::max(0.0, v));
  }

  static MarginalIndemnification constant(double value) {
    return MarginalIndemnification({0.0}, {value});
  }

  double operator()(double x) const { return values_[interval_index(x)]; }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  double terminal_value() const { return values_.back(); }

  // Merges adjacent intervals carrying equal values.
  MarginalIndemnification simplified() const {
    std::vector<double> bp{breakpoints_.front()};
    std::vector<double> vals{values_.front()};
    for (std::size_t i = 1; i < values_.size(); ++i) {
      if (values_[i] != vals.back()) {
        bp.push_back(breakpoints_[i]);
        vals.push_back(values_[i]);
      }
    }
    return MarginalIndemnification(std::move(bp), std::move(vals));
  }

  std::size_t interval_index(double x) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    if (it == breakpoints_.begin()) return 0;  // x < 0 treated as first interval
    return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

struct ValidationReport {
  bool ok = true;
  std::string violation;  // first violated clause, empty when ok
};

// Piecewise-linear contract, stored as breakpoints, values at breakpoints,
// and per-interval slopes (slopes_[i] applies on [breakpoints_[i], next)).
class IndemnificationFunction {
 public:
  IndemnificationFunction(std::vector<double> breakpoints, std::vector<double> slopes)
      : breakpoints_(std::move(breakpoints)), slopes_(std::move(slopes)) {
    auto report = check(breakpoints_, slopes_);
    if (!report.ok)
      throw std::invalid_argument("contract: " + report.violation);
    snap_slopes();
    accumulate_values();
  }

  // Builds without membership validation, for feeding validate() with
  // deliberately broken candidates.
  static IndemnificationFunction make_unchecked(std::vector<double> breakpoints,
                                                std::vector<double> slopes,
                                                double value_at_zero = 0.0) {
    IndemnificationFunction f;
    f.breakpoints_ = std::move(breakpoints);
    f.slopes_ = std::move(slopes);
    f.values_.assign(f.breakpoints_.size(), 0.0);
    f.values_[0] = value_at_zero;
    for (std::size_t i = 1; i < f.breakpoints_.size(); ++i)
      f.values_[i] = f.values_[i - 1] +
                     f.slopes_[i - 1] * (f.breakpoints_[i] - f.breakpoints_[i - 1]);
    return f;
  }

  double operator()(double x) const {
    if (x <= 0.0) return values_.front();
    if (std::isinf(x)) {
      if (slopes_.back() > 0.0) return std::numeric_limits<double>::infinity();
      return values_.back();
    }
    std::size_t i = interval_index(x);
    return values_[i] + slopes_[i] * (x - breakpoints_[i]);
  }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& slopes() const { return slopes_; }
  const std::vector<double>& values() const { return values_; }

  // sup{x : f(x) <= y}, the generalized upper inverse. Returns +inf when f
  // stays at or below y forever.
  double upper_inverse(double y) const {
    if (y < values_.front()) return -std::numeric_limits<double>::infinity();
    // Last breakpoint with value <= y; values_ is non-decreasing.
    auto it = std::upper_bound(values_.begin(), values_.end(), y);
    std::size_t i = static_cast<std::size_t>(it - values_.begin()) - 1;
    if (i == breakpoints_.size() - 1) {
      if (slopes_.back() <= 0.0) return std::numeric_limits<double>::infinity();
      return breakpoints_.back() + (y - values_.back()) / slopes_.back();
    }
    if (slopes_[i] <= 0.0) return breakpoints_[i + 1];
    return std::min(breakpoints_[i + 1], breakpoints_[i] + (y - values_[i]) / slopes_[i]);
  }

  static ValidationReport check(const std::vector<double>& breakpoints,
                                const std::vector<double>& slopes,
                                double value_at_zero = 0.0) {
    ValidationReport r;
    auto fail = [&r](std::string why) {
      r.ok = false;
      r.violation = std::move(why);
      return r;
    };
    if (breakpoints.empty() || breakpoints.front() != 0.0)
      return fail("breakpoints must start at 0");
    if (slopes.size() != breakpoints.size())
      return fail("one slope per breakpoint required");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
      if (!(breakpoints[i] > breakpoints[i - 1]))
        return fail("breakpoints must be strictly increasing");
    if (value_at_zero != 0.0) return fail("f(0) != 0");
    for (double s : slopes) {
      if (s < -kSlopeTol) return fail("f decreasing (slope < 0)");
      if (s > 1.0 + kSlopeTol) return fail("x - f(x) decreasing (slope > 1)");
    }
    return r;
  }

  std::size_t interval_index(double x) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    if (it == breakpoints_.begin()) return 0;
    return static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  }

 private:
  IndemnificationFunction() = default;

  void snap_slopes() {
    for (double& s : slopes_) s = std::min(1.0, std::max(0.0, s));
  }
  void accumulate_values() {
    values_.assign(breakpoints_.size(), 0.0);
    for (std::size_t i = 1; i < breakpoints_.size(); ++i)
      values_[i] = values_[i - 1] + slopes_[i - 1] * (breakpoints_[i] - breakpoints_[i - 1]);
  }

  std::vector<double> breakpoints_;
  std::vector<double> slopes_;
  std::vector<double> values_;
};

// --- constructors for the usual treaty shapes ---

inline IndemnificationFunction zero_contract() {
  return IndemnificationFunction({0.0}, {0.0});
}

inline IndemnificationFunction identity_contract() {
  return IndemnificationFunction({0.0}, {1.0});
}

inline IndemnificationFunction quota_share(double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0))
    throw std::invalid_argument("quota_share: ratio outside [0,1]");
  return IndemnificationFunction({0.0}, {ratio});
}

// f(x) = min(max(x - attachment, 0), limit); limit may be +inf.
inline IndemnificationFunction stop_loss(double attachment, double limit) {
  if (attachment < 0.0) throw std::invalid_argument("stop_loss: negative attachment");
  if (!(limit > 0.0)) throw std::invalid_argument("stop_loss: limit must be positive");
  if (attachment == 0.0) {
    if (std::isinf(limit)) return identity_contract();
    return IndemnificationFunction({0.0, limit}, {1.0, 0.0});
  }
  if (std::isinf(limit))
    return IndemnificationFunction({0.0, attachment}, {0.0, 1.0});
  return IndemnificationFunction({0.0, attachment, attachment + limit}, {0.0, 1.0, 0.0});
}

// --- operations between C and D ---

// f(x) = integral of h from 0 to x; exact accumulation, no quadrature.
inline IndemnificationFunction integrate_marginal(const MarginalIndemnification& h) {
  return IndemnificationFunction(h.breakpoints(), h.values());
}

// The a.e. derivative of f; inverse of integrate_marginal.
inline MarginalIndemnification differentiate(const IndemnificationFunction& f) {
  return MarginalIndemnification(f.breakpoints(), f.slopes());
}

inline ValidationReport validate(const IndemnificationFunction& f) {
  return IndemnificationFunction::check(f.breakpoints(), f.slopes(), f.values().front());
}

// x -> x - f(x), itself a member of C; an involution.
inline IndemnificationFunction retained(const IndemnificationFunction& f) {
  std::vector<double> slopes(f.slopes().size());
  for (std::size_t i = 0; i < slopes.size(); ++i) slopes[i] = 1.0 - f.slopes()[i];
  return IndemnificationFunction(f.breakpoints(), std::move(slopes));
}

// gamma*f + (1-gamma)*g on the merged breakpoint set. C is convex, so the
// result is again a valid contract.
inline IndemnificationFunction convex_combination(const IndemnificationFunction& f,
                                                  const IndemnificationFunction& g,
                                                  double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("convex_combination: gamma outside [0,1]");
  std::vector<double> bp;
  bp.reserve(f.breakpoints().size() + g.breakpoints().size());
  std::merge(f.breakpoints().begin(), f.breakpoints().end(), g.breakpoints().begin(),
             g.breakpoints().end(), std::back_inserter(bp));
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  std::vector<double> slopes(bp.size());
  for (std::size_t i = 0; i < bp.size(); ++i) {
    double x = bp[i];
    slopes[i] = gamma * f.slopes()[f.interval_index(x)] +
                (1.0 - gamma) * g.slopes()[g.interval_index(x)];
  }
  return IndemnificationFunction(std::move(bp), std::move(slopes));
}

// --- shape classification for reports ---

enum class ContractKind { Zero, Identity, QuotaShare, StopLoss, General };

struct ContractShape {
  ContractKind kind = ContractKind::General;
  std::string label = "general";
  double attachment = 0.0;                                   // stop-loss only
  double limit = std::numeric_limits<double>::infinity();    // stop-loss only
  double ratio = 0.0;                                        // quota-share only
};

inline ContractShape classify(const IndemnificationFunction& f, double tol = 1e-9) {
  auto h = differentiate(f).simplified();
  const auto& v = h.values();
  const auto& b = h.breakpoints();
  ContractShape shape;
  auto near = [tol](double a, double c) { return std::abs(a - c) <= tol; };
  if (v.size() == 1) {
    if (near(v[0], 0.0)) {
      shape.kind = ContractKind::Zero;
      shape.label = "zero";
    } else if (near(v[0], 1.0)) {
      shape.kind = ContractKind::Identity;
      shape.label = "identity";
    } else {
      shape.kind = ContractKind::QuotaShare;
      shape.label = "quota-share";
      shape.ratio = v[0];
    }
    return shape;
  }
  // Single 0/1 run pattern -> stop-loss.
  bool zero_one = true;
  int one_runs = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(near(v[i], 0.0) || near(v[i], 1.0))) zero_one = false;
    if (near(v[i], 1.0) && (i == 0 || near(v[i - 1], 0.0))) ++one_runs;
  }
  if (zero_one && one_runs == 1) {
    shape.kind = ContractKind::StopLoss;
    shape.label = "stop-loss";
    std::size_t start = 0;
    while (!near(v[start], 1.0)) ++start;
    shape.attachment = b[start];
    if (start + 1 < b.size())
      shape.limit = b[start + 1] - b[start];
    else
      shape.limit = std::numeric_limits<double>::infinity();
  }
  return shape;
}

}  // namespace cede
