#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "groom/random.hpp"

namespace groom {

/// Parameters shared by every groomer in a run.
struct ModelParams {
  double a = 1.0;      // trade-off exponent in C = N m^a
  double alpha = 1.0;  // slope of v(w) = alpha w + 1
  int T = 100;         // observation horizon in days
  double b = 1.0;      // cost exponent, C = u^b (only used when deriving C)

  void validate() const;
};

struct GroomerSpec {
  std::string id;
  double C = 1.0;
  int N_target = 1;
  double m_target = 1.0;  // (C / N_target)^(1/a)

  static GroomerSpec make(std::string id, double C, int N_target, double a);
};

/// Tie strengths of one groomer. Groomees are local to the groomer.
struct SimLedger {
  std::vector<double> strengths;
  int day = 0;

  static SimLedger initial() { return SimLedger{{1.0}, 0}; }

  [[nodiscard]] int ties() const { return static_cast<int>(strengths.size()); }
  [[nodiscard]] double mean_strength() const;
};

/// Book-keeping for one simulated day.
struct DayStats {
  double budget = 0.0;
  double spent = 0.0;
  int created = 0;
  int reinforced = 0;
};

/// v(w) = alpha w + 1.
double grooming_cost(double w, double alpha);

/// G(a, alpha; C, m) = alpha C (m^(1-a) - m^(-a)) / T.
double grooming_budget(const ModelParams& params, double C, double m);

/// (C / N)^(1/a).
double target_mean_strength(double C, double N, double a);

/// Daily budget used by the simulator for a groomer. Targets with m < 1
/// (C < N) have nothing left for reinforcement and get zero.
double daily_budget(const ModelParams& params, const GroomerSpec& spec);

/// Advances one groomer by day t (1-based). Creation runs first, then
/// strength-proportional reinforcement without repeats within the day.
DayStats simulate_day(SimLedger& ledger, const GroomerSpec& spec,
                      const ModelParams& params, int t, Rng& rng);

/// Runs one groomer for T days from the initial single tie.
SimLedger simulate_groomer(const GroomerSpec& spec, const ModelParams& params,
                           Rng& rng);

/// Runs every groomer for T days. Groomer i draws from its own stream
/// seeded by (seed, i), so results do not depend on evaluation order.
std::vector<SimLedger> run_simulation(std::span<const GroomerSpec> specs,
                                      const ModelParams& params,
                                      std::uint64_t seed);

}  // namespace groom
