#include <cmath>
#include <numeric>

#include "doctest.h"
#include "groom/model.hpp"
#include "groom/statfit.hpp"

using namespace groom;

namespace {

// Dense-scan argmax of G over m in [1, m_hi], independent of the closed form.
double scan_argmax(const ModelParams& p, double C, double m_hi, double step) {
  double best_m = 1.0, best = -1.0;
  for (double m = 1.0; m <= m_hi; m += step) {
    const double g = grooming_budget(p, C, m);
    if (g > best) {
      best = g;
      best_m = m;
    }
  }
  return best_m;
}

}  // namespace

TEST_CASE("grooming_cost evaluates alpha w + 1") {
  CHECK(grooming_cost(0.0, 0.0) == 1.0);
  CHECK(grooming_cost(0.0, 3.7) == 1.0);
  CHECK(grooming_cost(1.0, 1.034927) == doctest::Approx(2.034927).epsilon(1e-15));
  CHECK(grooming_cost(2.0, 2.0) == 5.0);
  CHECK(grooming_cost(0.5, 2.0) < grooming_cost(0.6, 2.0));
  CHECK_THROWS_AS(grooming_cost(-0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(grooming_cost(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("grooming_cost is affine: v(w1) + v(w2) - 1 = v(w1 + w2)") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double w1 = 10 * uniform01(rng), w2 = 10 * uniform01(rng), al = 5 * uniform01(rng);
    CHECK(grooming_cost(w1, al) + grooming_cost(w2, al) - 1.0 ==
          doctest::Approx(grooming_cost(w1 + w2, al)).epsilon(1e-12));
  }
}

TEST_CASE("grooming_budget closed forms") {
  for (double a : {0.3, 1.0, 1.7})
    for (int T : {1, 30, 365}) CHECK(grooming_budget({a, 1.3, T, 1.0}, 42.0, 1.0) == 0.0);

  const ModelParams p{1.0, 1.5, 50, 1.0};
  for (double m : {1.5, 2.0, 10.0, 123.0})
    CHECK(grooming_budget(p, 80.0, m) == doctest::Approx(1.5 * 80.0 * (1.0 - 1.0 / m) / 50.0));

  // As printed: alpha C (m^(1-a) - m^(-a)) / T.
  const ModelParams q{1.3, 0.8, 20, 1.0};
  const double m = 7.5;
  CHECK(grooming_budget(q, 300.0, m) ==
        doctest::Approx(0.8 * 300.0 * (std::pow(m, 1 - 1.3) - std::pow(m, -1.3)) / 20.0).epsilon(1e-13));

  CHECK_THROWS_AS(grooming_budget(p, 10.0, 0.99), std::invalid_argument);
  CHECK_THROWS_AS(grooming_budget(p, 0.0, 2.0), std::invalid_argument);
}

TEST_CASE("grooming_budget peaks at a / (a - 1) for a > 1") {
  const ModelParams p{1.5, 1.0, 100, 1.0};
  CHECK(scan_argmax(p, 100.0, 20.0, 1e-4) == doctest::Approx(3.0).epsilon(1e-4));
  for (double a : {1.1, 2.0}) {
    const double peak = a / (a - 1.0);
    const double found = scan_argmax({a, 1.0, 100, 1.0}, 100.0, 3 * peak, 1e-4);
    CHECK(found == doctest::Approx(peak).epsilon(1e-4));
  }
}

TEST_CASE("grooming_budget shape: increasing for a < 1, unimodal for a > 1") {
  for (double a : {0.3, 0.6, 0.95}) {
    const ModelParams p{a, 1.0, 10, 1.0};
    double prev = grooming_budget(p, 50.0, 1.0);
    for (double m = 1.01; m < 200.0; m += 0.01) {
      const double g = grooming_budget(p, 50.0, m);
      REQUIRE(g > prev);
      prev = g;
    }
  }
  for (double a : {1.2, 1.5, 3.0}) {
    const ModelParams p{a, 1.0, 10, 1.0};
    const double peak = a / (a - 1.0);
    int sign_changes = 0;
    double prev = grooming_budget(p, 50.0, 1.0);
    bool rising = true;
    for (double m = 1.01; m < 10 * peak; m += 0.01) {
      const double g = grooming_budget(p, 50.0, m);
      const bool up = g > prev;
      if (up != rising) {
        ++sign_changes;
        CHECK(m == doctest::Approx(peak).epsilon(0.01));
      }
      rising = up;
      prev = g;
    }
    CHECK(sign_changes == 1);
  }
}

TEST_CASE("target_mean_strength") {
  for (double a : {0.4, 1.0, 2.5}) CHECK(target_mean_strength(17.0, 17.0, a) == 1.0);
  CHECK(target_mean_strength(90.0, 9.0, 1.0) == doctest::Approx(10.0));
  CHECK(target_mean_strength(1000.0, 10.0, 2.0) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK_THROWS_AS(target_mean_strength(0.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(target_mean_strength(1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(target_mean_strength(1.0, 1.0, 0.0), std::invalid_argument);

  const auto spec = GroomerSpec::make("x", 1000.0, 10, 2.0);
  CHECK(spec.m_target == std::pow(1000.0 / 10.0, 1.0 / 2.0));
  CHECK_THROWS_AS(GroomerSpec::make("x", 10.0, 0, 1.0), std::invalid_argument);
}

TEST_CASE("poisson sampler matches the target law") {
  Rng rng(3);
  const double lambda = 0.7;
  const int n = 200000;
  double sum = 0, sq = 0;
  int zeros = 0;
  for (int i = 0; i < n; ++i) {
    const int k = poisson(rng, lambda);
    sum += k;
    sq += static_cast<double>(k) * k;
    zeros += k == 0;
  }
  const double mean = sum / n, var = sq / n - mean * mean;
  CHECK(mean == doctest::Approx(lambda).epsilon(0.01));
  CHECK(var == doctest::Approx(lambda).epsilon(0.02));
  CHECK(static_cast<double>(zeros) / n == doctest::Approx(std::exp(-lambda)).epsilon(0.01));
  CHECK(poisson(rng, 0.0) == 0);
  CHECK_THROWS_AS(poisson(rng, -1.0), std::invalid_argument);
}

TEST_CASE("simulate_day: a single-tie groomer never creates ties") {
  const auto spec = GroomerSpec::make("g", 500.0, 1, 1.2);
  const ModelParams p{1.2, 1.0, 100, 1.0};
  Rng rng(5);
  const auto ledger = simulate_groomer(spec, p, rng);
  CHECK(ledger.ties() == 1);
  CHECK(ledger.day == 100);
}

TEST_CASE("simulate_day: zero budget leaves every tie at strength 1") {
  // C = N gives m_target = 1 and G = 0.
  const auto spec = GroomerSpec::make("g", 40.0, 40, 1.2);
  const ModelParams p{1.2, 2.0, 100, 1.0};
  Rng rng(9);
  const auto ledger = simulate_groomer(spec, p, rng);
  CHECK(ledger.ties() > 1);
  for (double d : ledger.strengths) CHECK(d == 1.0);
}

TEST_CASE("simulate_day rejects days outside [1, T]") {
  const auto spec = GroomerSpec::make("g", 50.0, 5, 1.0);
  const ModelParams p{1.0, 1.0, 10, 1.0};
  auto ledger = SimLedger::initial();
  Rng rng(1);
  CHECK_THROWS_AS(simulate_day(ledger, spec, p, 0, rng), std::invalid_argument);
  CHECK_THROWS_AS(simulate_day(ledger, spec, p, 11, rng), std::invalid_argument);
  SimLedger empty;
  CHECK_THROWS_AS(simulate_day(empty, spec, p, 1, rng), std::invalid_argument);
}

TEST_CASE("simulate_day: budget conservation and monotone increments") {
  Rng pick(21);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = 0.5 + 1.5 * uniform01(pick);
    const double alpha = 3.0 * uniform01(pick);
    const int N = 1 + static_cast<int>(60 * uniform01(pick));
    const double C = N * (1.0 + 50.0 * uniform01(pick));
    const ModelParams p{a, alpha, 60, 1.0};
    const auto spec = GroomerSpec::make("g", C, N, a);
    auto ledger = SimLedger::initial();
    Rng rng(derive_seed(99, {static_cast<std::uint64_t>(trial)}));
    for (int t = 1; t <= p.T; ++t) {
      const auto before = ledger.strengths;
      const auto stats = simulate_day(ledger, spec, p, t, rng);
      REQUIRE(stats.spent <= stats.budget + 1e-9);
      int changed = 0;
      for (std::size_t j = 0; j < before.size(); ++j) {
        const double inc = ledger.strengths[j] - before[j];
        REQUIRE(inc >= 0.0);
        REQUIRE(inc <= 1.0 + 1e-12);
        changed += inc > 0.0;
      }
      for (std::size_t j = before.size(); j < ledger.strengths.size(); ++j) {
        const double inc = ledger.strengths[j] - 1.0;
        REQUIRE(inc >= 0.0);
        REQUIRE(inc <= 1.0 + 1e-12);
        changed += inc > 0.0;
      }
      // Budget is exhausted unless every partner was groomed.
      if (stats.reinforced < ledger.ties()) CHECK(stats.spent == doctest::Approx(stats.budget));
      CHECK(changed == stats.reinforced);
    }
  }
}

TEST_CASE("reinforcement picks partners in proportion to strength") {
  // a = 1, C = 2, N = 1, T = 1: G = 1 while both partners cost > 1, so
  // exactly one fractional draw happens per day.
  const ModelParams p{1.0, 1.0, 1, 1.0};
  const auto spec = GroomerSpec::make("g", 2.0, 1, 1.0);
  Rng rng(2024);
  const int trials = 100000;
  int second = 0;
  for (int i = 0; i < trials; ++i) {
    SimLedger ledger{{1.0, 3.0}, 0};
    const auto stats = simulate_day(ledger, spec, p, 1, rng);
    REQUIRE(stats.reinforced == 1);
    second += ledger.strengths[1] > 3.0;
  }
  CHECK(static_cast<double>(second) / trials == doctest::Approx(0.75).epsilon(0.01 / 0.75));
}

TEST_CASE("run_simulation: T = 0 keeps the initial tie only") {
  const auto problem = log_spaced_problem(1.2, 100, 300.0, 10);
  const auto ledgers = run_simulation(problem.specs, {1.2, 1.0, 0, 1.0}, 1);
  for (const auto& l : ledgers) {
    CHECK(l.ties() == 1);
    CHECK(l.mean_strength() == 1.0);
  }
  CHECK_THROWS_AS(run_simulation({}, {1.2, 1.0, 10, 1.0}, 1), std::invalid_argument);
}

TEST_CASE("run_simulation: expected tie count equals N_target") {
  const std::vector<GroomerSpec> specs{GroomerSpec::make("g", 400.0, 20, 1.2)};
  const ModelParams p{1.2, 1.0, 100, 1.0};
  const int reps = 600;
  double sum = 0, sq = 0;
  for (int r = 0; r < reps; ++r) {
    const auto l = run_simulation(specs, p, derive_seed(7, {static_cast<std::uint64_t>(r)}));
    sum += l[0].ties();
    sq += static_cast<double>(l[0].ties()) * l[0].ties();
  }
  const double mean = sum / reps;
  const double se = std::sqrt((sq / reps - mean * mean) / reps);
  CHECK(std::fabs(mean - 20.0) <= 2 * se);
}

TEST_CASE("run_simulation is deterministic for a seed") {
  const double C = std::pow(75.0, 1.30935);
  const auto problem = log_spaced_problem(1.2, 100, C, 30);
  const ModelParams p{1.2, 1.0, 100, 1.0};
  const auto x = run_simulation(problem.specs, p, 42);
  const auto y = run_simulation(problem.specs, p, 42);
  REQUIRE(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].strengths == y[i].strengths);
  const auto z = run_simulation(problem.specs, p, 43);
  bool differs = false;
  for (std::size_t i = 0; i < x.size(); ++i) differs |= x[i].strengths != z[i].strengths;
  CHECK(differs);
}
