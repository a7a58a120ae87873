#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cede/contract.hpp"
#include "cede/distortion.hpp"
#include "cede/distribution.hpp"
#include "cede/quadrature.hpp"

namespace cede {

// Unified reinsurance design problem
//   min over the contract space C of  a1*L1(X0 - f(X0)) + a2*L2(f(X0)) + offset.
// The ceding and social-planner problems solve for the ceded function
// directly; the reinsurer problem solves for the retained function k and
// reports the ceded contract x - k*(x).
struct ReinsuranceProblem {
  enum class SolveFor { Ceded, Retained };
  enum class Origin { Ceding, Reinsurer, Social, Custom };

  double a1 = 1.0;
  RiskFunctional lambda1;
  double a2 = 1.0;
  RiskFunctional lambda2;
  LossDistribution loss;
  double constant_offset = 0.0;
  SolveFor solve_for = SolveFor::Ceded;
  Origin origin = Origin::Custom;
};

inline ReinsuranceProblem make_problem(double a1, RiskFunctional l1, double a2,
                                       RiskFunctional l2, LossDistribution loss,
                                       double offset = 0.0,
                                       ReinsuranceProblem::SolveFor solve_for =
                                           ReinsuranceProblem::SolveFor::Ceded) {
  if (!(a1 > 0.0 && a2 > 0.0))
    throw std::invalid_argument("problem weights a1, a2 must be positive");
  return ReinsuranceProblem{a1,   std::move(l1), a2,        std::move(l2),
                            std::move(loss), offset,        solve_for,
                            ReinsuranceProblem::Origin::Custom};
}

// Ceding company: min rho_I(retained) + (1+rho)*premium(ceded).
inline ReinsuranceProblem build_ceding(double rho, RiskFunctional measure,
                                       RiskFunctional premium, LossDistribution loss) {
  if (!(rho >= 0.0)) throw std::invalid_argument("build_ceding: rho must be >= 0");
  return ReinsuranceProblem{1.0,   std::move(measure), 1.0 + rho, std::move(premium),
                            std::move(loss), 0.0,
                            ReinsuranceProblem::SolveFor::Ceded,
                            ReinsuranceProblem::Origin::Ceding};
}

// Reinsurer: min rho_R(ceded) - (1+rho)*premium(ceded), rewritten over the
// retained function k with the constant -(1+rho)*premium(X0) split off.
inline ReinsuranceProblem build_reinsurer(double rho, RiskFunctional measure,
                                          RiskFunctional premium, LossDistribution loss,
                                          const EvalOptions& opts = {}) {
  if (!(rho >= 0.0)) throw std::invalid_argument("build_reinsurer: rho must be >= 0");
  double premium_x0 = risk_value(premium, loss, opts);  // throws when divergent
  return ReinsuranceProblem{1.0,   std::move(measure), 1.0 + rho, std::move(premium),
                            std::move(loss), -(1.0 + rho) * premium_x0,
                            ReinsuranceProblem::SolveFor::Retained,
                            ReinsuranceProblem::Origin::Reinsurer};
}

// Social planner: min rho_R(ceded) + rho_I(retained).
inline ReinsuranceProblem build_social(RiskFunctional rho_insurer,
                                       RiskFunctional rho_reinsurer, LossDistribution loss) {
  return ReinsuranceProblem{1.0,   std::move(rho_insurer), 1.0, std::move(rho_reinsurer),
                            std::move(loss), 0.0,
                            ReinsuranceProblem::SolveFor::Ceded,
                            ReinsuranceProblem::Origin::Social};
}

// Psi(t) = (a2 - a1) - (a2*Pi2(t) - a1*Pi1(t)). Cede exactly where
// Psi(F_X0(s)) is negative; Psi(1) = 0 always.
inline double psi(const ReinsuranceProblem& p, double t) {
  return (p.a2 - p.a1) -
         (p.a2 * p.lambda2.distortion.pi(t) - p.a1 * p.lambda1.distortion.pi(t));
}

struct SolverOptions {
  double tol_sign = 1e-12;       // |Psi| below this counts as a tie
  int scan_points = 4096;        // bracketing grid on the loss axis
  int max_sign_changes = 64;
  double breakpoint_tol = 1e-10; // loss-axis bisection accuracy
  EvalOptions eval;
};

namespace detail {

// Maximal constant-sign runs of s -> sign(Psi(F(s))) over [0, inf); the last
// run extends beyond the scan horizon. cls is -1 / 0 / +1.
struct SignRun {
  double start;
  int cls;
};

struct SignStructure {
  std::vector<SignRun> runs;
  double scan_hi = 0.0;                 // loss-axis horizon actually examined
  std::vector<double> interior_cuts;    // distortion-kink quantiles, for quadrature
};

inline int sign_class(double v, double tol) { return v > tol ? 1 : (v < -tol ? -1 : 0); }

inline SignStructure analyze_sign(const ReinsuranceProblem& p, const SolverOptions& opts) {
  SignStructure out;
  const LossDistribution& d = p.loss;

  if (d.is_empirical()) {
    // F is a step function: Psi(F(.)) is constant between atoms and the sign
    // pattern is read off exactly, one probability evaluation per interval.
    const auto& e = d.as_empirical();
    out.scan_hi = e.values.back();
    std::size_t n = e.values.size();
    for (std::size_t i = 0; i <= n; ++i) {
      double start = i == 0 ? 0.0 : e.values[i - 1];
      if (!out.runs.empty() && start == out.runs.back().start) out.runs.pop_back();
      // Beyond the last atom F == 1 and Psi(1) == 0 identically.
      double t = i == 0 ? 0.0 : (i == n ? 1.0 : std::min(e.cum[i - 1], 1.0));
      out.runs.push_back({start, sign_class(psi(p, t), opts.tol_sign)});
    }
  } else {
    auto [lo, hi] = d.support();
    const bool unbounded = std::isinf(hi);
    const double H = unbounded ? d.quantile_tail(opts.eval.tail_eps) : hi;
    out.scan_hi = H;

    // Cut the axis at the quantiles of every distortion atom/kink so jumps of
    // Psi(F(.)) land on grid points and each cell holds at most one crossing.
    std::vector<double> cuts{0.0, H};
    if (lo > 0.0 && lo < H) cuts.push_back(lo);
    auto add_cut = [&](double t) {
      if (t <= 0.0 || t >= 1.0) return;
      double s = d.quantile(t);
      if (s > 0.0 && s < H) {
        cuts.push_back(s);
        out.interior_cuts.push_back(s);
      }
    };
    for (const auto& lam : {p.lambda1, p.lambda2}) {
      for (const PiAtom& a : lam.distortion.atoms()) add_cut(a.location);
      for (double k : lam.distortion.kink_points()) add_cut(k);
    }
    for (double s : d.loss_axis_kinks())
      if (s > 0.0 && s < H) {
        cuts.push_back(s);
        out.interior_cuts.push_back(s);
      }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::sort(out.interior_cuts.begin(), out.interior_cuts.end());
    out.interior_cuts.erase(std::unique(out.interior_cuts.begin(), out.interior_cuts.end()),
                            out.interior_cuts.end());

    auto cls_at = [&](double s) { return sign_class(psi(p, d.cdf(s)), opts.tol_sign); };

    // Scan grid proportional to cell width, then bisect each class change.
    std::vector<double> grid;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      double a = cuts[i], b = cuts[i + 1];
      int cells = std::max(4, static_cast<int>(opts.scan_points * (b - a) / H));
      for (int j = 0; j < cells; ++j)
        grid.push_back(a + (b - a) * static_cast<double>(j) / cells);
    }
    grid.push_back(H);

    int prev_cls = cls_at(grid.front());
    out.runs.push_back({0.0, prev_cls});
    for (std::size_t i = 1; i < grid.size(); ++i) {
      int c = cls_at(grid[i]);
      if (c == prev_cls) continue;
      double a = grid[i - 1], b = grid[i];
      while (b - a > opts.breakpoint_tol) {
        double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        if (cls_at(m) == prev_cls)
          a = m;
        else
          b = m;
      }
      out.runs.push_back({b, c});
      prev_cls = c;
    }
  }

  // Merge duplicate classes (can appear after empty empirical intervals).
  std::vector<SignRun> merged;
  for (const auto& r : out.runs)
    if (merged.empty() || merged.back().cls != r.cls) merged.push_back(r);
  out.runs = std::move(merged);

  int changes = static_cast<int>(out.runs.size()) - 1;
  if (changes > opts.max_sign_changes)
    throw std::runtime_error(
        "solver: " + std::to_string(changes) +
        " sign changes of Psi(F(.)) exceed max_sign_changes; refine the scan grid "
        "or raise the limit");
  return out;
}

}  // namespace detail

// Optimal marginal indemnification: 1 where Psi(F(.)) < 0, 0 where > 0, and
// 0 on ties by convention (any value is optimal there).
inline MarginalIndemnification optimal_marginal(const ReinsuranceProblem& p,
                                                const SolverOptions& opts = {}) {
  auto structure = detail::analyze_sign(p, opts);
  std::vector<double> bp;
  std::vector<double> vals;
  for (const auto& r : structure.runs) {
    bp.push_back(r.start);
    vals.push_back(r.cls == -1 ? 1.0 : 0.0);
  }
  return MarginalIndemnification(std::move(bp), std::move(vals)).simplified();
}

// Objective at an arbitrary admissible contract, evaluated through the laws
// of the two sides; f is the problem's solve variable (ceded function for
// ceding/social, retained function for the reinsurer formulation).
inline double objective(const ReinsuranceProblem& p, const IndemnificationFunction& f,
                        const EvalOptions& opts = {}) {
  auto report = validate(f);
  if (!report.ok)
    throw std::invalid_argument("objective: contract not admissible: " + report.violation);
  double r1 = risk_value(p.lambda1, push_forward(retained(f), p.loss), opts);
  double r2 = risk_value(p.lambda2, push_forward(f, p.loss), opts);
  return p.a1 * r1 + p.a2 * r2 + p.constant_offset;
}

struct Solution {
  MarginalIndemnification marginal =
      MarginalIndemnification::constant(0.0);          // optimal h* for the solve variable
  IndemnificationFunction contract = zero_contract();  // integral of h* (solve variable)
  IndemnificationFunction ceded = zero_contract();     // reported ceded contract
  double minimum_value = 0.0;         // closed-form a1*L1(X0) - int Psi^- + offset
  double objective_at_optimum = 0.0;  // independent evaluation through the laws
  std::vector<std::pair<double, double>> tie_regions;
  std::vector<double> sign_changes_loss;
  std::vector<double> sign_changes_prob;
};

inline Solution solve(const ReinsuranceProblem& p, const SolverOptions& opts = {}) {
  auto structure = detail::analyze_sign(p, opts);
  const LossDistribution& d = p.loss;

  std::vector<double> bp, vals;
  Solution sol;
  for (std::size_t i = 0; i < structure.runs.size(); ++i) {
    const auto& r = structure.runs[i];
    bp.push_back(r.start);
    vals.push_back(r.cls == -1 ? 1.0 : 0.0);
    double end = i + 1 < structure.runs.size() ? structure.runs[i + 1].start : kInf;
    if (r.cls == 0) sol.tie_regions.emplace_back(r.start, end);
    if (i > 0) {
      sol.sign_changes_loss.push_back(r.start);
      sol.sign_changes_prob.push_back(d.cdf(r.start));
    }
  }
  sol.marginal = MarginalIndemnification(std::move(bp), std::move(vals)).simplified();
  sol.contract = integrate_marginal(sol.marginal);
  sol.ceded = p.solve_for == ReinsuranceProblem::SolveFor::Retained ? retained(sol.contract)
                                                                    : sol.contract;

  // Minimum value: a1*L1(X0) + sum over negative runs of int Psi(F(s)) ds.
  double negative_part = 0.0;
  if (d.is_empirical()) {
    const auto& e = d.as_empirical();
    std::size_t n = e.values.size();
    for (std::size_t i = 0; i < n; ++i) {
      double start = i == 0 ? 0.0 : e.values[i - 1];
      double len = e.values[i] - start;
      if (len <= 0.0) continue;
      double v = psi(p, i == 0 ? 0.0 : std::min(e.cum[i - 1], 1.0));
      if (v < -opts.tol_sign) negative_part += v * len;
    }
  } else {
    for (std::size_t i = 0; i < structure.runs.size(); ++i) {
      if (structure.runs[i].cls != -1) continue;
      double a = structure.runs[i].start;
      double b = i + 1 < structure.runs.size() ? structure.runs[i + 1].start
                                               : structure.scan_hi;
      b = std::min(b, structure.scan_hi);
      if (b <= a) continue;
      // Integrate piecewise between the distortion-kink quantiles.
      std::vector<double> seg{a, b};
      for (double c : structure.interior_cuts)
        if (c > a && c < b) seg.push_back(c);
      std::sort(seg.begin(), seg.end());
      for (std::size_t j = 0; j + 1 < seg.size(); ++j)
        negative_part += integrate([&](double s) { return psi(p, d.cdf(s)); }, seg[j],
                                   seg[j + 1], opts.eval.rel_tol, opts.eval.abs_tol);
    }
  }
  sol.minimum_value =
      p.a1 * risk_value(p.lambda1, d, opts.eval) + negative_part + p.constant_offset;
  sol.objective_at_optimum = objective(p, sol.contract, opts.eval);
  return sol;
}

}  // namespace cede
