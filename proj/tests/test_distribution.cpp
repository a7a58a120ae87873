#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "cede/distribution.hpp"
#include "cede/distortion.hpp"
#include "cede/oracle.hpp"

using namespace cede;

namespace {

const double kLn10 = std::log(10.0);

LossDistribution two_atom() {
  return LossDistribution::empirical({{1.0, 0.5}, {3.0, 0.5}});
}

std::vector<LossDistribution> model_zoo() {
  return {LossDistribution::exponential(1.0), LossDistribution::lognormal(0.0, 1.0),
          LossDistribution::uniform(0.0, 2.0), LossDistribution::uniform(1.0, 4.0),
          two_atom(),
          LossDistribution::empirical({{0.5, 0.25}, {1.0, 0.25}, {2.0, 0.25}, {4.0, 0.25}}),
          LossDistribution::exponential(1.0).truncated(2.5)};
}

}  // namespace

TEST_CASE("cdf basics") {
  CHECK(LossDistribution::exponential(1.0).cdf(0.0) == 0.0);
  CHECK(two_atom().cdf(2.0) == 0.5);
  CHECK(two_atom().cdf(0.5) == 0.0);
  CHECK(two_atom().cdf(3.0) == 1.0);
  // Analytic inverse, cross-checked below by integrating the density.
  CHECK_THAT(LossDistribution::exponential(1.0).cdf(kLn10),
             Catch::Matchers::WithinAbs(0.9, 1e-12));
}

TEST_CASE("cdf agrees with integrated density for the exponential") {
  auto d = LossDistribution::exponential(1.0);
  double x = kLn10;
  // Plain midpoint integration of the density, independent of cdf_impl.
  int n = 200000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double t = (i + 0.5) * x / n;
    acc += std::exp(-t) * x / n;
  }
  CHECK_THAT(d.cdf(x), Catch::Matchers::WithinAbs(acc, 1e-8));
}

TEST_CASE("quantile basics") {
  auto exp1 = LossDistribution::exponential(1.0);
  CHECK_THAT(exp1.quantile(0.9), Catch::Matchers::WithinAbs(kLn10, 1e-14));
  CHECK(exp1.quantile(0.0) == 0.0);
  CHECK(std::isinf(exp1.quantile(1.0)));
  CHECK_THROWS_AS(exp1.quantile(-0.1), std::domain_error);
  CHECK_THROWS_AS(exp1.quantile(1.5), std::domain_error);
}

TEST_CASE("empirical quantile uses the lower convention") {
  auto d = two_atom();
  // Brute force over the two-atom cdf: q(p) = inf{x : F(x) >= p}.
  auto brute = [&](double p) {
    for (double x = 0.0; x <= 4.0; x += 1e-4)
      if (d.cdf(x) >= p) return x;
    return 4.0;
  };
  CHECK(d.quantile(0.5) == 1.0);
  CHECK(d.quantile(0.5) <= brute(0.5));
  CHECK(d.quantile(0.5) >= brute(0.5) - 1e-4);
  CHECK(d.quantile(0.500001) == 3.0);
  CHECK(d.quantile(1.0) == 3.0);
  CHECK(d.quantile(0.0) == 1.0);
}

TEST_CASE("support") {
  auto [ulo, uhi] = LossDistribution::uniform(0.0, 1.0).support();
  CHECK(ulo == 0.0);
  CHECK(uhi == 1.0);
  auto [elo, ehi] = LossDistribution::exponential(1.0).support();
  CHECK(elo == 0.0);
  CHECK(std::isinf(ehi));
  auto [tlo, thi] = LossDistribution::exponential(1.0).truncated(5.0).support();
  CHECK(tlo == 0.0);
  CHECK(thi == 5.0);
}

TEST_CASE("truncation") {
  auto u = LossDistribution::uniform(0.0, 1.0);
  auto capped = u.truncated(2.0);
  for (double x : {0.0, 0.25, 0.5, 0.99, 1.5})
    CHECK(capped.cdf(x) == u.cdf(x));
  for (double p : {0.0, 0.1, 0.5, 0.999})
    CHECK(capped.quantile(p) == u.quantile(p));

  auto tiny = LossDistribution::exponential(1.0).truncated(1e-4);
  CHECK_THAT(mean(tiny), Catch::Matchers::WithinRel(-std::expm1(-1e-4), 1e-6));

  CHECK(LossDistribution::exponential(1.0).truncated(3.0).cdf(3.0) == 1.0);
  CHECK_THROWS_AS(u.truncated(0.0), std::domain_error);
  CHECK_THROWS_AS(u.truncated(-1.0), std::domain_error);
}

TEST_CASE("discretize midpoint rule") {
  auto d = LossDistribution::uniform(0.0, 1.0).discretized(4, 1.0);
  REQUIRE(d.is_empirical());
  const auto& e = d.as_empirical();
  REQUIRE(e.values.size() == 4);
  CHECK(e.values[0] == 0.125);
  CHECK(e.values[1] == 0.375);
  CHECK(e.values[2] == 0.625);
  CHECK(e.values[3] == 0.875);
  for (double w : e.weights) CHECK(w == 0.25);
}

TEST_CASE("discretize reproduces empirical quantiles on matched grids") {
  auto a = LossDistribution::empirical({{1.0, 0.25}, {2.0, 0.25}, {3.0, 0.25}, {4.0, 0.25}});
  auto d = a.discretized(8, 1.0);
  for (int i = 0; i < 8; ++i) {
    double level = (i + 0.5) / 8.0;
    CHECK(d.quantile(level) == a.quantile(level));
  }
}

TEST_CASE("discretized exponential keeps its mean") {
  auto d = LossDistribution::exponential(1.0).discretized(10000, 0.9999);
  CHECK_THAT(mean(d), Catch::Matchers::WithinAbs(1.0, 0.01));
}

TEST_CASE("discretize validation") {
  auto d = LossDistribution::exponential(1.0);
  CHECK_THROWS_AS(d.discretized(1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(d.discretized(4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(d.discretized(4, 1.5), std::invalid_argument);
}

TEST_CASE("empirical validation") {
  CHECK_THROWS_AS(LossDistribution::empirical({{1.0, 0.4}, {2.0, 0.4}}), std::invalid_argument);
  CHECK_THROWS_AS(LossDistribution::empirical({{-1.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(LossDistribution::empirical({}), std::invalid_argument);
  // Atoms within 1e-12 merge.
  auto d = LossDistribution::empirical({{1.0, 0.5}, {1.0 + 1e-13, 0.5}});
  CHECK(d.as_empirical().values.size() == 1);
}

TEST_CASE("survival complements cdf exactly") {
  std::mt19937_64 g(7);
  for (const auto& d : model_zoo()) {
    for (int i = 0; i < 200; ++i) {
      double x = rng::uniform(g, 0.0, 6.0);
      CHECK(d.survival(x) + d.cdf(x) == 1.0);
    }
  }
}

TEST_CASE("Galois inequalities between cdf and quantile") {
  std::mt19937_64 g(11);
  for (const auto& d : model_zoo()) {
    for (int i = 0; i < 200; ++i) {
      double p = rng::uniform(g, 1e-6, 1.0 - 1e-6);
      CHECK(d.cdf(d.quantile(p)) >= p - 1e-12);
      // Sampling beyond survival ~1e-6 would push cdf(x) within an ulp of 1,
      // where the probability axis can no longer represent the roundtrip.
      auto [lo, hi] = d.support();
      double x = rng::uniform(g, lo, std::min(hi, d.quantile_tail(1e-6)));
      double q = d.quantile(d.cdf(x));
      CHECK(q <= x + 1e-9 * (1.0 + std::abs(x)));
    }
  }
}

TEST_CASE("quantile is non-decreasing") {
  std::mt19937_64 g(13);
  for (const auto& d : model_zoo()) {
    double prev = d.quantile(1e-9);
    for (int i = 1; i <= 500; ++i) {
      double p = i / 501.0;
      double q = d.quantile(p);
      CHECK(q >= prev);
      prev = q;
    }
  }
}

TEST_CASE("truncate then quantile equals min of quantile and cap") {
  std::mt19937_64 g(17);
  for (const auto& d : model_zoo()) {
    for (double cap : {0.5, 1.7, 3.0, 40.0}) {
      auto t = d.truncated(cap);
      for (int i = 0; i < 100; ++i) {
        double p = rng::uniform(g, 1e-9, 1.0 - 1e-9);
        CHECK_THAT(t.quantile(p),
                   Catch::Matchers::WithinAbs(std::min(d.quantile(p), cap), 1e-12));
      }
    }
  }
}

TEST_CASE("quantile_tail matches quantile away from the tail") {
  for (const auto& d : model_zoo()) {
    for (double p : {0.1, 0.5, 0.9, 0.99}) {
      CHECK_THAT(d.quantile_tail(1.0 - p),
                 Catch::Matchers::WithinRel(d.quantile(p), 1e-9));
    }
  }
}
