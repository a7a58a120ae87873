#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cede/solver.hpp"

namespace cede {

// Brute-force certification on empirical losses. The objective is linear in
// the marginal values over the inter-atom intervals
//   a1*L1(X0) + sum_i Psi(F_i) * h_i * len_i + offset,
// so exhaustive enumeration over {0,1}^n and per-interval sign selection
// must produce identical minima; both are compared against the solver.

struct DiscreteProblem {
  ReinsuranceProblem problem;
  std::vector<double> lengths;     // inter-atom interval lengths, first is [0, x1)
  std::vector<double> psi_values;  // Psi at the interval's cdf value
  double base = 0.0;               // a1 * L1(X0), exact empirical sum
};

inline constexpr std::size_t kExhaustiveAtomLimit = 20;

inline DiscreteProblem make_discrete(const ReinsuranceProblem& p) {
  if (!p.loss.is_empirical())
    throw std::invalid_argument("oracle: discrete problems require an empirical loss");
  const auto& e = p.loss.as_empirical();
  DiscreteProblem dp{p, {}, {}, 0.0};
  const std::size_t n = e.values.size();
  dp.lengths.reserve(n);
  dp.psi_values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double start = i == 0 ? 0.0 : e.values[i - 1];
    dp.lengths.push_back(e.values[i] - start);
    dp.psi_values.push_back(psi(p, i == 0 ? 0.0 : std::min(e.cum[i - 1], 1.0)));
  }
  dp.base = p.a1 * risk_value(p.lambda1, p.loss);
  return dp;
}

// Closed-form finite sum; h holds one value in [0,1] per interval.
inline double exact_objective(const DiscreteProblem& dp, const std::vector<double>& h) {
  if (h.size() != dp.lengths.size())
    throw std::invalid_argument("exact_objective: one marginal value per interval required");
  double acc = dp.base + dp.problem.constant_offset;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] >= 0.0 && h[i] <= 1.0))
      throw std::invalid_argument("exact_objective: marginal values must lie in [0,1]");
    acc += dp.psi_values[i] * h[i] * dp.lengths[i];
  }
  return acc;
}

enum class OracleMode { Exhaustive, SignGreedy };

struct OracleResult {
  std::vector<double> h;
  double value = 0.0;
  std::uint32_t mask = 0;
};

inline OracleResult brute_force(const DiscreteProblem& dp, OracleMode mode) {
  const std::size_t n = dp.lengths.size();
  std::vector<double> contrib(n);
  for (std::size_t i = 0; i < n; ++i) contrib[i] = dp.psi_values[i] * dp.lengths[i];

  OracleResult out;
  out.h.assign(n, 0.0);
  const double base = dp.base + dp.problem.constant_offset;

  if (mode == OracleMode::SignGreedy) {
    out.value = base;
    for (std::size_t i = 0; i < n; ++i)
      if (contrib[i] < 0.0) {
        out.h[i] = 1.0;
        out.mask |= (1u << i);
        out.value += contrib[i];
      }
    return out;
  }

  if (n > kExhaustiveAtomLimit)
    throw std::invalid_argument(
        "oracle: exhaustive enumeration is limited to " +
        std::to_string(kExhaustiveAtomLimit) + " atoms; use sign-greedy mode instead");
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_mask = 0;
  const std::uint32_t total = 1u << n;
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    double v = base;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) v += contrib[i];
    if (v < best) {
      best = v;
      best_mask = mask;
    }
  }
  out.value = best;
  out.mask = best_mask;
  for (std::size_t i = 0; i < n; ++i) out.h[i] = (best_mask & (1u << i)) ? 1.0 : 0.0;
  return out;
}

// --- seeded instance generation ---

namespace rng {

inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}
inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

}  // namespace rng

inline DistortionFunction random_distortion(std::mt19937_64& g) {
  switch (g() % 5) {
    case 0:
      return DistortionFunction::expected_value();
    case 1:
      return DistortionFunction::var_step(rng::uniform(g, 0.05, 0.95));
    case 2:
      return DistortionFunction::cvar_ramp(rng::uniform(g, 0.0, 0.9));
    case 3:
      return DistortionFunction::wang(rng::uniform(g, -2.0, 2.0));
    default: {
      // Piecewise linear with 3-5 knots; occasionally one knot carries a jump.
      int interior = 1 + static_cast<int>(g() % 3);
      std::set<double> ts;
      while (static_cast<int>(ts.size()) < interior) ts.insert(rng::uniform(g, 0.05, 0.95));
      std::vector<double> increments(static_cast<std::size_t>(interior) + 1);
      double total = 0.0;
      for (double& w : increments) {
        w = 0.05 + rng::uniform01(g);
        total += w;
      }
      std::vector<std::pair<double, double>> knots{{0.0, 0.0}};
      double v = 0.0;
      std::size_t j = 0;
      for (double t : ts) {
        v += increments[j++] / total;
        knots.emplace_back(t, v);
      }
      knots.emplace_back(1.0, 1.0);
      if (rng::uniform01(g) < 0.3 && interior >= 1) {
        // Split the step after one interior knot into a jump of half its mass.
        std::size_t k = 1 + g() % static_cast<std::size_t>(interior);
        double next_v = knots[k + 1].second;
        double jump = 0.5 * (next_v - knots[k].second);
        knots.insert(knots.begin() + static_cast<std::ptrdiff_t>(k) + 1,
                     {knots[k].first, knots[k].second + jump});
      }
      return DistortionFunction::piecewise_linear(std::move(knots));
    }
  }
}

inline LossDistribution random_empirical_loss(std::mt19937_64& g, int n_atoms) {
  std::set<int> picks;
  while (static_cast<int>(picks.size()) < n_atoms)
    picks.insert(1 + static_cast<int>(g() % 60));
  std::vector<double> weights(static_cast<std::size_t>(n_atoms));
  double total = 0.0;
  for (double& w : weights) {
    w = -std::log(1.0 - rng::uniform01(g) * (1.0 - 1e-12));
    w += 1e-6;
    total += w;
  }
  std::vector<std::pair<double, double>> pts;
  std::size_t i = 0;
  for (int k : picks) pts.emplace_back(0.25 * k, weights[i++] / total);
  return LossDistribution::empirical(std::move(pts));
}

// A random member of C: random breakpoints with slopes drawn from
// {0, 1, interior}, so linearity tests see genuinely interior marginals.
inline IndemnificationFunction random_contract(std::mt19937_64& g, double scale) {
  int pieces = 1 + static_cast<int>(g() % 5);
  std::set<double> bps;
  while (static_cast<int>(bps.size()) < pieces - 1)
    bps.insert(rng::uniform(g, 0.05 * scale, scale));
  std::vector<double> bp{0.0};
  bp.insert(bp.end(), bps.begin(), bps.end());
  std::vector<double> slopes;
  for (int i = 0; i < pieces; ++i) {
    double r = rng::uniform01(g);
    slopes.push_back(r < 0.3 ? 0.0 : (r < 0.6 ? 1.0 : rng::uniform01(g)));
  }
  return IndemnificationFunction(std::move(bp), std::move(slopes));
}

inline std::vector<double> random_interior_marginal(std::mt19937_64& g, std::size_t n) {
  std::vector<double> h(n);
  for (double& v : h) v = rng::uniform(g, 0.001, 0.999);
  return h;
}

// Random unified problem on an empirical loss; weights, distortions and the
// loss itself are all drawn from the seeded stream.
inline ReinsuranceProblem random_instance(std::uint64_t seed, int n_atoms) {
  std::mt19937_64 g(seed);
  LossDistribution loss = random_empirical_loss(g, n_atoms);
  double a1 = rng::uniform(g, 0.5, 2.0);
  double a2 = rng::uniform(g, 0.5, 2.0);
  RiskFunctional l1 = RiskFunctional::measure(random_distortion(g));
  RiskFunctional l2 = RiskFunctional::premium(random_distortion(g));
  return make_problem(a1, std::move(l1), a2, std::move(l2), std::move(loss));
}

struct OracleReport {
  std::uint64_t seed = 0;
  int n_atoms = 0;
  double solver_min = 0.0;
  double exhaustive_min = 0.0;
  double greedy_min = 0.0;
  std::uint32_t argmin_mask = 0;
  double solver_delta = 0.0;  // max |solver - oracle| across the two modes
};

struct OracleCheckResult {
  std::vector<OracleReport> reports;
  double max_delta = 0.0;
  bool all_ok = true;
};

inline OracleCheckResult oracle_check(std::uint64_t seed, int count, int n_atoms,
                                      double tolerance = 1e-10,
                                      const SolverOptions& opts = {}) {
  if (n_atoms < 1 || static_cast<std::size_t>(n_atoms) > kExhaustiveAtomLimit)
    throw std::invalid_argument(
        "oracle_check: exhaustive enumeration is limited to " +
        std::to_string(kExhaustiveAtomLimit) +
        " atoms; rerun with fewer atoms or use sign-greedy mode directly");
  OracleCheckResult out;
  for (int k = 0; k < count; ++k) {
    std::uint64_t s = seed + static_cast<std::uint64_t>(k);
    ReinsuranceProblem p = random_instance(s, n_atoms);
    Solution sol = solve(p, opts);
    DiscreteProblem dp = make_discrete(p);
    OracleResult ex = brute_force(dp, OracleMode::Exhaustive);
    OracleResult gr = brute_force(dp, OracleMode::SignGreedy);
    OracleReport rep;
    rep.seed = s;
    rep.n_atoms = n_atoms;
    rep.solver_min = sol.minimum_value;
    rep.exhaustive_min = ex.value;
    rep.greedy_min = gr.value;
    rep.argmin_mask = ex.mask;
    rep.solver_delta = std::max(std::abs(sol.minimum_value - ex.value),
                                std::max(std::abs(sol.minimum_value - gr.value),
                                         std::abs(ex.value - gr.value)));
    out.max_delta = std::max(out.max_delta, rep.solver_delta);
    out.all_ok = out.all_ok && rep.solver_delta <= tolerance;
    out.reports.push_back(rep);
  }
  return out;
}

}  // namespace cede
