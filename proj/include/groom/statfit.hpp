#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "groom/model.hpp"

namespace groom {

/// Raised when a fit cannot be computed from the supplied sample.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Trade-off regression: log N ~ Normal(-a log m + b log u, sigma)

struct AgentObs {
  double N = 1.0;
  double m = 1.0;
  double u = 1.0;
};

struct TradeoffFit {
  double a_hat = 0.0, b_hat = 0.0;
  double se_a = 0.0, se_b = 0.0;
  double t_a = 0.0, t_b = 0.0;  // t_a against a = 1, t_b against b = 0
  double p_a = 1.0, p_b = 1.0;
  double adj_r2 = 0.0;
  double sigma_hat = 0.0;
  std::size_t n = 0;

  /// Two-sided 95% interval half-widths from the t distribution.
  [[nodiscard]] double ci95_a() const;
  [[nodiscard]] double ci95_b() const;
};

TradeoffFit fit_tradeoff(std::span<const AgentObs> agents);

// ---------------------------------------------------------------------------
// Ordinary least squares with Gaussian AIC

struct LinearFit {
  std::vector<double> beta;
  std::vector<double> se;
  std::vector<double> t;
  std::vector<double> p;  // two-sided, null 0
  double rss = 0.0;
  double sigma = 0.0;    // sqrt(rss / (n - k))
  double aic = 0.0;      // n ln(rss/n) + 2(k+1) + n(1 + ln 2 pi)
  double adj_r2 = 0.0;   // centred; the design is assumed to hold an intercept
  std::size_t n = 0;
};

/// Fits y on the columns of `design` (column-major list of regressors).
/// Requires n >= k + 2 and a full-rank design.
LinearFit linear_fit_aic(std::span<const double> y,
                         const std::vector<std::vector<double>>& design);

/// Gaussian maximum-likelihood AIC for a least-squares fit with k coefficients.
double gaussian_aic(double rss, std::size_t n, std::size_t k);

struct ThresholdFit {
  // phi ~ b1 a f + b2 a (1 - f) + b3 f + b0, f = [a >= threshold]
  double beta1 = 0.0, beta2 = 0.0, beta3 = 0.0, beta0 = 0.0;
  double sigma = 0.0;
  double aic_threshold = 0.0;
  // phi ~ slope a + intercept
  double linear_slope = 0.0, linear_intercept = 0.0;
  double aic_linear = 0.0;
  double threshold = 0.8;
  std::size_t n = 0;
  LinearFit threshold_model;
  LinearFit linear_model;

  [[nodiscard]] bool threshold_preferred() const { return aic_threshold < aic_linear; }
};

ThresholdFit threshold_fit(std::span<const std::pair<double, double>> points,
                           double a_threshold = 0.8);

// ---------------------------------------------------------------------------
// Simulation error and alpha calibration

struct StrengthPair {
  double N = 1.0;
  double m = 1.0;
};

/// Mean over groomers of (ln N - ln N')^2 + (ln m - ln m')^2.
double sim_error(std::span<const StrengthPair> targets, std::span<const StrengthPair> realized);

/// Realized (tie count, mean strength) of simulated ledgers.
std::vector<StrengthPair> realized_pairs(std::span<const SimLedger> ledgers);

/// Calibration problem: groomers to simulate and the (N, m) they should hit.
struct AlphaProblem {
  double a = 1.0;
  int T = 100;
  std::vector<GroomerSpec> specs;
  std::vector<StrengthPair> targets;
};

/// M groomers with N equally spaced in log scale over [1, T] (rounded to
/// integers) and shared cost C; targets are (N_i, (C/N_i)^(1/a)).
AlphaProblem log_spaced_problem(double a, int T, double C, int M);

/// N_i grid used by log_spaced_problem.
std::vector<int> log_spaced_ties(int T, int M);

struct AlphaSearch {
  double lo = 1.0 / 16.0;
  double hi = 8.0;
  double initial_step = 1.0 / 16.0;
  int passes = 3;
  int reps = 10;
  std::uint64_t seed = 20190501;
  unsigned jobs = 1;
  /// Objective range below which the search reports a flat objective.
  double flat_tolerance = 1e-12;
};

struct AlphaResult {
  double alpha = 0.0;
  double error = 0.0;  // mean e over reps at alpha
  bool flat = false;
  std::vector<std::pair<double, double>> evaluated;  // (alpha, mean e), sorted by alpha
};

/// Mean e over `reps` simulations at one alpha. Rep r uses seed (seed, r)
/// for every alpha, so candidates are compared on common random numbers.
double mean_sim_error(const AlphaProblem& problem, double alpha, int reps,
                      std::uint64_t seed);

/// Grid refinement over [lo, hi]: each pass evaluates a grid around the
/// incumbent with half the previous step. Ties keep the smaller alpha.
AlphaResult optimize_alpha(const AlphaProblem& problem, const AlphaSearch& search = {});

// ---------------------------------------------------------------------------
// Power-law and hierarchy summaries

struct PowerLawFit {
  double phi = 0.0;
  double x_min = 1.0;
  std::size_t n = 0;
  std::string method = "continuous-mle";
};

/// phi = 1 + n / sum ln(d / x_min), x_min = 1.
PowerLawFit fit_powerlaw(std::span<const double> strengths);

enum class HierarchyMode {
  data,  // H_k counts d >= k
  sim,   // H_k counts d > k
};

struct HierarchyProfile {
  std::vector<long long> H;  // H[0] is H_1
  HierarchyMode mode = HierarchyMode::data;
};

HierarchyProfile hierarchy_profile(std::span<const double> strengths, HierarchyMode mode, int K);

/// H_k / H_{k+1} for k = 1..K-1; empty where H_{k+1} = 0.
std::vector<std::optional<double>> hierarchy_ratios(const HierarchyProfile& profile);

// ---------------------------------------------------------------------------
// Correlation

struct Correlation {
  double r = 0.0;
  double p = 1.0;  // two-sided, t with n - 2 df
  std::size_t n = 0;
};

Correlation pearson(std::span<const double> x, std::span<const double> y);

/// Correlation of log G(a, alpha; C_i, m_i) with log G_i. Inputs are the
/// positive budgets, logs are taken here.
Correlation budget_correlation(std::span<const double> predicted, std::span<const double> actual);

/// Two-sided p-value of a t statistic.
double t_pvalue(double t, double df);

/// Linear-interpolated quantile (R type 7). `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace groom
