#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "groom/ingest.hpp"
#include "groom/model.hpp"
#include "groom/statfit.hpp"

namespace groom {

/// A groomer drawn from an observed population: cost and tie count.
struct PopulationAgent {
  std::string id;
  double C = 1.0;
  int N = 1;
};

/// Population with Twitter-like marginals for desk-scale runs when the
/// real event log is unavailable. Participation u is log-uniform on
/// [T/10, T], C = u^b, and N = C^s with s ~ U(0.3, 0.9), clamped to [1, T].
std::vector<PopulationAgent> synthetic_population(int M, int T, double b, std::uint64_t seed);

std::vector<PopulationAgent> population_from_agents(const std::vector<AgentSummary>& agents);

/// 75th percentile of C over the population.
double cost_quantile(const std::vector<PopulationAgent>& population, double q = 0.75);

/// Defaults standing in for the Twitter data set.
struct TwitterLike {
  static constexpr double a = 1.18957;
  static constexpr double b = 1.30935;
  static constexpr double alpha = 1.034927;
  static constexpr int T = 100;
  static constexpr int population = 200;
  static constexpr std::uint64_t population_seed = 2009;
};

std::vector<double> pooled_strengths(const std::vector<SimLedger>& ledgers);

// ---------------------------------------------------------------------------
// Experiment 1: calibrate alpha to a data set, re-simulate, compare budgets.

struct Exp1Dataset {
  double a = 1.0;
  double b = 1.0;
  int T = 100;
  std::vector<AgentSummary> agents;
  /// Observed strengths d_ij, for the CCDF comparison. Optional.
  std::vector<double> strengths;
  /// Total acts per agent aligned with `agents`, for the budget correlation. Optional.
  std::vector<long long> acts;
};

/// Builds a data set from raw events (T = last day + 1 unless given).
Exp1Dataset dataset_from_events(const std::vector<InteractionEvent>& events, double a, double b,
                                std::optional<int> T = std::nullopt);

struct Exp1Config {
  int M = 30;
  AlphaSearch search{};
  std::uint64_t seed = 20190501;
};

struct Exp1Row {
  std::string id;
  double C = 0.0;
  int N = 0;
  double m = 0.0;
  double N_sim = 0.0;
  double m_sim = 0.0;
  double G_pred = 0.0;              // G(a, alpha*; C_i, m_i)
  std::optional<double> G_actual;   // (acts - N) / T
};

struct Exp1Result {
  double a = 0.0, b = 0.0;
  int T = 0;
  double C75 = 0.0;
  AlphaResult alpha;
  std::vector<Exp1Row> rows;
  std::vector<double> data_strengths;
  std::vector<double> sim_strengths;
  std::optional<Correlation> correlation;
  std::optional<std::string> correlation_note;
};

Exp1Result experiment1(const Exp1Dataset& data, const Exp1Config& config);

// ---------------------------------------------------------------------------
// Experiment 2: (a, alpha) sweep, lowest-e selection, phi and hierarchy fits.

struct GridAxis {
  double lo = 0.0, hi = 0.0, step = 0.0;
  [[nodiscard]] std::vector<double> values() const;
};

/// How the lowest-e cells of each a are chosen.
enum class Selection {
  per_result,      // rank every (alpha, rep) result by e
  per_alpha_mean,  // rank alphas by their mean e over reps
};

struct SweepConfig {
  GridAxis a_axis{0.50, 2.00, 0.05};
  GridAxis alpha_axis{1.00, 3.00, 0.02};
  int reps = 50;
  int T = TwitterLike::T;
  double C = 0.0;  // 0: 75th percentile of the population's C
  int M = 30;
  int select = 20;
  Selection selection = Selection::per_result;
  double threshold = 0.8;
  int K = 11;  // H_1..H_K, ratios for k = 1..K-1
  std::uint64_t seed = 20190501;
  unsigned jobs = 1;
  std::vector<PopulationAgent> population;  // empty: synthetic Twitter-like

  void validate() const;
};

/// Seed of replication `rep` at grid indices (ia, ialpha).
std::uint64_t cell_seed(std::uint64_t master, std::size_t ia, std::size_t ialpha, int rep);
/// Seed of the population re-run for the same coordinates.
std::uint64_t rerun_seed(std::uint64_t master, std::size_t ia, std::size_t ialpha, int rep);

struct SweepCell {
  double a = 0.0, alpha = 0.0;
  std::size_t ia = 0, ialpha = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  double e = 0.0;
  std::optional<double> phi;          // population re-run, selected cells only
  std::vector<long long> H;           // population re-run, selected cells only
  std::vector<StrengthPair> realized; // sweep simulation (M groomers)
};

/// Computes one sweep replication in isolation. `rerun` adds phi and H
/// from a population re-run.
SweepCell compute_cell(const SweepConfig& config, const std::vector<PopulationAgent>& population,
                       double C, std::size_t ia, std::size_t ialpha, int rep, bool rerun);

/// One selected unit: a single (alpha, rep) result, or every rep of an
/// alpha under Selection::per_alpha_mean.
struct SelectedCell {
  double a = 0.0, alpha = 0.0;
  std::vector<int> reps;
  double e_mean = 0.0;
  double phi = 0.0;                  // mean of the re-run phi over `reps`
  std::vector<long long> H;          // summed over `reps`
  std::vector<std::optional<double>> ratios;
};

struct ASummary {
  double a = 0.0;
  double alpha_mean = 0.0, alpha_sd = 0.0;
  double phi_mean = 0.0, phi_sd = 0.0;
  std::size_t selected = 0;
  bool short_selection = false;
};

struct RatioFit {
  int k = 0;
  double slope = 0.0, intercept = 0.0;
  double se = 0.0, p = 1.0;
  std::size_t n = 0;
};

struct SweepResult {
  SweepConfig config;
  double C = 0.0;
  std::vector<SweepCell> cells;  // sorted by (ia, ialpha, rep)
  std::vector<SelectedCell> selected;
  std::vector<ASummary> summary;
  std::optional<ThresholdFit> threshold;
  std::optional<std::string> threshold_error;
  std::vector<RatioFit> ratio_fits;
};

SweepResult experiment2(SweepConfig config);

/// Lowest-`select` units per a. Each group lists indices into `cells`.
/// Ties are broken by (e, alpha, rep). Groups are ordered by (a, alpha, rep).
std::vector<std::vector<std::size_t>> select_lowest(const std::vector<SweepCell>& cells, int select,
                                                    Selection mode);

/// Rebuilds per-a summaries, the threshold fit and the ratio regressions
/// from selected cells. Used by experiment2 and by the report command.
void analyse_selection(SweepResult& result);

}  // namespace groom
