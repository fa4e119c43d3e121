#include "groom/statfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "groom/parallel.hpp"

namespace groom {

namespace {

struct OlsCore {
  Eigen::VectorXd beta;
  Eigen::MatrixXd cov_unscaled;  // (X'X)^-1
  Eigen::VectorXd fitted;
  double rss = 0.0;
};

OlsCore ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const auto k = X.cols();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < k)
    throw EstimationError(fmt::format("collinear design: rank {} < {} regressors", qr.rank(), k));
  OlsCore out;
  out.beta = qr.solve(y);
  out.fitted = X * out.beta;
  out.rss = (y - out.fitted).squaredNorm();
  const Eigen::MatrixXd xtx = X.transpose() * X;
  out.cov_unscaled = xtx.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  return out;
}

double t_quantile_975(double df) {
  boost::math::students_t dist(df);
  return boost::math::quantile(dist, 0.975);
}

}  // namespace

double t_pvalue(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// ---------------------------------------------------------------------------

double TradeoffFit::ci95_a() const { return t_quantile_975(static_cast<double>(n) - 2.0) * se_a; }
double TradeoffFit::ci95_b() const { return t_quantile_975(static_cast<double>(n) - 2.0) * se_b; }

TradeoffFit fit_tradeoff(std::span<const AgentObs> agents) {
  const auto n = agents.size();
  if (n < 3) throw EstimationError(fmt::format("fit_tradeoff needs at least 3 agents (got {})", n));
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = agents[i];
    if (!(g.N >= 1.0) || !(g.m >= 1.0) || !(g.u >= 1.0))
      throw std::invalid_argument(
          fmt::format("agent {}: need N, m, u >= 1 (got {}, {}, {})", i, g.N, g.m, g.u));
    X(i, 0) = -std::log(g.m);
    X(i, 1) = std::log(g.u);
    y(i) = std::log(g.N);
  }
  auto distinct = [](const Eigen::VectorXd& v) {
    return (v.array() != v(0)).any();
  };
  if (!distinct(X.col(0))) throw EstimationError("collinear design: all agents share one m");
  if (!distinct(X.col(1))) throw EstimationError("collinear design: all agents share one u");

  const auto core = ols(X, y);
  const double df = static_cast<double>(n) - 2.0;
  TradeoffFit fit;
  fit.n = n;
  fit.a_hat = core.beta(0);
  fit.b_hat = core.beta(1);
  const double s2 = core.rss / df;
  fit.sigma_hat = std::sqrt(s2);
  fit.se_a = std::sqrt(s2 * core.cov_unscaled(0, 0));
  fit.se_b = std::sqrt(s2 * core.cov_unscaled(1, 1));
  fit.t_a = (fit.a_hat - 1.0) / fit.se_a;
  fit.t_b = fit.b_hat / fit.se_b;
  fit.p_a = t_pvalue(fit.t_a, df);
  fit.p_b = t_pvalue(fit.t_b, df);
  // No intercept: uncentred R^2, adjusted with n rather than n - 1.
  const double mss = core.fitted.squaredNorm();
  const double r2 = mss / (mss + core.rss);
  fit.adj_r2 = 1.0 - (1.0 - r2) * static_cast<double>(n) / df;
  return fit;
}

// ---------------------------------------------------------------------------

double gaussian_aic(double rss, std::size_t n, std::size_t k) {
  const double nn = static_cast<double>(n);
  return nn * std::log(rss / nn) + 2.0 * (static_cast<double>(k) + 1.0) +
         nn * (1.0 + std::log(2.0 * std::numbers::pi));
}

LinearFit linear_fit_aic(std::span<const double> y,
                         const std::vector<std::vector<double>>& design) {
  const auto n = y.size();
  const auto k = design.size();
  if (k == 0) throw std::invalid_argument("linear_fit_aic: empty design");
  if (n < k + 2)
    throw EstimationError(fmt::format("linear fit needs at least {} points (got {})", k + 2, n));
  Eigen::MatrixXd X(n, k);
  Eigen::VectorXd Y(n);
  for (std::size_t c = 0; c < k; ++c) {
    if (design[c].size() != n) throw std::invalid_argument("design column length mismatch");
    for (std::size_t i = 0; i < n; ++i) X(i, c) = design[c][i];
  }
  for (std::size_t i = 0; i < n; ++i) Y(i) = y[i];

  const auto core = ols(X, Y);
  const double df = static_cast<double>(n - k);
  LinearFit fit;
  fit.n = n;
  fit.rss = core.rss;
  fit.sigma = std::sqrt(core.rss / df);
  fit.aic = gaussian_aic(core.rss, n, k);
  const double s2 = core.rss / df;
  for (std::size_t c = 0; c < k; ++c) {
    fit.beta.push_back(core.beta(c));
    fit.se.push_back(std::sqrt(s2 * core.cov_unscaled(c, c)));
    fit.t.push_back(fit.beta.back() / fit.se.back());
    fit.p.push_back(t_pvalue(fit.t.back(), df));
  }
  const double mean = Y.mean();
  const double tss = (Y.array() - mean).square().sum();
  fit.adj_r2 = tss > 0.0 ? 1.0 - (core.rss / df) / (tss / (static_cast<double>(n) - 1.0)) : 0.0;
  return fit;
}

ThresholdFit threshold_fit(std::span<const std::pair<double, double>> points, double a_threshold) {
  const auto n = points.size();
  std::vector<double> y(n), a(n), af(n), a1f(n), f(n), one(n, 1.0);
  std::size_t upper = 0;
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = points[i].first;
    y[i] = points[i].second;
    f[i] = a[i] >= a_threshold ? 1.0 : 0.0;
    af[i] = a[i] * f[i];
    a1f[i] = a[i] * (1.0 - f[i]);
    upper += f[i] > 0.0;
  }
  if (upper == 0 || upper == n)
    throw EstimationError(
        fmt::format("threshold fit needs points on both sides of a = {}", a_threshold));

  ThresholdFit out;
  out.threshold = a_threshold;
  out.n = n;
  out.threshold_model = linear_fit_aic(y, {af, a1f, f, one});
  out.linear_model = linear_fit_aic(y, {a, one});
  const auto& tb = out.threshold_model.beta;
  out.beta1 = tb[0];
  out.beta2 = tb[1];
  out.beta3 = tb[2];
  out.beta0 = tb[3];
  out.sigma = out.threshold_model.sigma;
  out.aic_threshold = out.threshold_model.aic;
  out.linear_slope = out.linear_model.beta[0];
  out.linear_intercept = out.linear_model.beta[1];
  out.aic_linear = out.linear_model.aic;
  return out;
}

// ---------------------------------------------------------------------------

double sim_error(std::span<const StrengthPair> targets, std::span<const StrengthPair> realized) {
  if (targets.size() != realized.size())
    throw std::invalid_argument(fmt::format("sim_error: {} targets vs {} realized",
                                            targets.size(), realized.size()));
  if (targets.empty()) throw std::invalid_argument("sim_error: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& x = targets[i];
    const auto& z = realized[i];
    if (!(x.N > 0.0) || !(x.m > 0.0) || !(z.N > 0.0) || !(z.m > 0.0))
      throw std::invalid_argument(fmt::format("sim_error: non-positive entry at {}", i));
    const double dn = std::log(x.N) - std::log(z.N);
    const double dm = std::log(x.m) - std::log(z.m);
    sum += dn * dn + dm * dm;
  }
  return sum / static_cast<double>(targets.size());
}

std::vector<StrengthPair> realized_pairs(std::span<const SimLedger> ledgers) {
  std::vector<StrengthPair> out;
  out.reserve(ledgers.size());
  for (const auto& l : ledgers) out.push_back({static_cast<double>(l.ties()), l.mean_strength()});
  return out;
}

std::vector<int> log_spaced_ties(int T, int M) {
  if (T < 1 || M < 1) throw std::invalid_argument("log_spaced_ties: need T >= 1 and M >= 1");
  std::vector<int> out;
  out.reserve(M);
  for (int i = 0; i < M; ++i) {
    const double frac = M == 1 ? 0.0 : static_cast<double>(i) / (M - 1);
    out.push_back(static_cast<int>(std::lround(std::exp(frac * std::log(static_cast<double>(T))))));
  }
  return out;
}

AlphaProblem log_spaced_problem(double a, int T, double C, int M) {
  AlphaProblem p;
  p.a = a;
  p.T = T;
  const auto ties = log_spaced_ties(T, M);
  for (std::size_t i = 0; i < ties.size(); ++i) {
    auto spec = GroomerSpec::make(fmt::format("g{}", i), C, ties[i], a);
    p.targets.push_back({static_cast<double>(spec.N_target), spec.m_target});
    p.specs.push_back(std::move(spec));
  }
  return p;
}

double mean_sim_error(const AlphaProblem& problem, double alpha, int reps, std::uint64_t seed) {
  if (reps < 1) throw std::invalid_argument("mean_sim_error: reps must be >= 1");
  const ModelParams params{problem.a, alpha, problem.T, 1.0};
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto ledgers = run_simulation(problem.specs, params, derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    sum += sim_error(problem.targets, realized_pairs(ledgers));
  }
  return sum / reps;
}

AlphaResult optimize_alpha(const AlphaProblem& problem, const AlphaSearch& search) {
  if (!(problem.a > 0.0)) throw std::invalid_argument("optimize_alpha: a must be > 0");
  if (problem.specs.empty() || problem.specs.size() != problem.targets.size())
    throw std::invalid_argument("optimize_alpha: specs and targets must be non-empty and aligned");
  if (!(search.lo >= 0.0) || !(search.hi > search.lo) || !(search.initial_step > 0.0) ||
      search.passes < 1)
    throw std::invalid_argument("optimize_alpha: invalid search settings");

  std::map<double, double> cache;
  auto evaluate = [&](const std::vector<double>& grid) {
    std::vector<double> todo;
    for (double x : grid)
      if (!cache.contains(x)) todo.push_back(x);
    std::vector<double> values(todo.size());
    parallel_for(todo.size(), search.jobs, [&](std::size_t i) {
      values[i] = mean_sim_error(problem, todo[i], search.reps, search.seed);
    });
    for (std::size_t i = 0; i < todo.size(); ++i) cache[todo[i]] = values[i];
  };
  auto grid_between = [](double lo, double hi, double step) {
    std::vector<double> g;
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= count; ++i) g.push_back(lo + static_cast<double>(i) * step);
    return g;
  };
  auto best_of = [&] {
    double best_x = std::numeric_limits<double>::quiet_NaN();
    double best_e = std::numeric_limits<double>::infinity();
    for (const auto& [x, e] : cache)
      if (std::isfinite(e) && e < best_e) {
        best_e = e;
        best_x = x;
      }
    return std::pair{best_x, best_e};
  };

  double step = search.initial_step;
  evaluate(grid_between(search.lo, search.hi, step));
  auto [best, best_e] = best_of();
  if (!std::isfinite(best_e)) throw EstimationError("optimize_alpha: no finite error on the grid");

  AlphaResult out;
  double lo_e = std::numeric_limits<double>::infinity(), hi_e = -lo_e;
  for (const auto& [x, e] : cache) {
    lo_e = std::min(lo_e, e);
    hi_e = std::max(hi_e, e);
  }
  out.flat = hi_e - lo_e <= search.flat_tolerance;

  for (int pass = 1; pass < search.passes && !out.flat; ++pass) {
    const double lo = std::max(search.lo, best - step);
    const double hi = std::min(search.hi, best + step);
    step /= 2.0;
    evaluate(grid_between(lo, hi, step));
    std::tie(best, best_e) = best_of();
  }
  out.alpha = best;
  out.error = best_e;
  out.evaluated.assign(cache.begin(), cache.end());
  return out;
}

// ---------------------------------------------------------------------------

PowerLawFit fit_powerlaw(std::span<const double> strengths) {
  constexpr std::size_t kMinSample = 10;
  if (strengths.size() < kMinSample)
    throw EstimationError(
        fmt::format("power-law fit needs at least {} strengths (got {})", kMinSample, strengths.size()));
  double log_sum = 0.0;
  for (double d : strengths) {
    if (!(d >= 1.0))
      throw std::invalid_argument(fmt::format("power-law fit: strength {} below x_min = 1", d));
    log_sum += std::log(d);
  }
  if (!(log_sum > 0.0))
    throw EstimationError("power-law fit: every strength equals x_min, phi is infinite");
  PowerLawFit fit;
  fit.n = strengths.size();
  fit.phi = 1.0 + static_cast<double>(fit.n) / log_sum;
  return fit;
}

HierarchyProfile hierarchy_profile(std::span<const double> strengths, HierarchyMode mode, int K) {
  if (K < 2) throw std::invalid_argument(fmt::format("hierarchy_profile: K must be >= 2 (got {})", K));
  HierarchyProfile prof;
  prof.mode = mode;
  prof.H.assign(K, 0);
  for (double d : strengths) {
    // Number of thresholds k in [1, K] that d passes.
    const double fl = std::floor(d);
    long top = static_cast<long>(fl);
    if (mode == HierarchyMode::sim && fl == d) top -= 1;
    top = std::min<long>(top, K);
    for (long k = 1; k <= top; ++k) ++prof.H[k - 1];
  }
  return prof;
}

std::vector<std::optional<double>> hierarchy_ratios(const HierarchyProfile& profile) {
  std::vector<std::optional<double>> out;
  for (std::size_t k = 0; k + 1 < profile.H.size(); ++k) {
    if (profile.H[k + 1] > 0)
      out.emplace_back(static_cast<double>(profile.H[k]) / static_cast<double>(profile.H[k + 1]));
    else
      out.emplace_back(std::nullopt);
  }
  return out;
}

// ---------------------------------------------------------------------------

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  const auto n = x.size();
  if (n < 3) throw EstimationError("pearson: need at least 3 pairs");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw EstimationError("pearson: zero variance");
  Correlation c;
  c.n = n;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(n) - 2.0;
  if (std::fabs(c.r) >= 1.0) {
    c.p = 0.0;
  } else {
    c.p = t_pvalue(c.r * std::sqrt(df / (1.0 - c.r * c.r)), df);
  }
  return c;
}

Correlation budget_correlation(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size())
    throw std::invalid_argument("budget_correlation: length mismatch");
  std::vector<double> lp, la;
  lp.reserve(predicted.size());
  la.reserve(actual.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!(predicted[i] > 0.0) || !(actual[i] > 0.0))
      throw std::invalid_argument(fmt::format("budget_correlation: non-positive entry at {}", i));
    lp.push_back(std::log(predicted[i]));
    la.push_back(std::log(actual[i]));
  }
  return pearson(lp, la);
}

}  // namespace groom
