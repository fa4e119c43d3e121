// Acceptance harness: one PASS/FAIL/SKIP line per criterion.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <fmt/core.h>

#include "groom/experiments.hpp"
#include "groom/model.hpp"
#include "groom/parallel.hpp"
#include "groom/report.hpp"
#include "groom/statfit.hpp"

using namespace groom;
namespace fs = std::filesystem;

namespace {

int required_failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::cout << fmt::format("{} criterion {}: {}", pass ? "PASS" : "FAIL", id, detail) << std::endl;
  if (!pass) ++required_failures;
}

bool close_rel(double x, double y, double tol) { return std::fabs(x - y) <= tol * std::fabs(y); }

// Argmax of G by nested dense scans: 10^4 points, then zoom around the best.
double dense_scan_peak(const ModelParams& p, double C, double hi) {
  double lo = 1.0;
  double best = lo;
  for (int level = 0; level < 6; ++level) {
    const int n = 10000;
    const double step = (hi - lo) / n;
    double gmax = -1.0;
    for (int i = 0; i <= n; ++i) {
      const double m = lo + i * step;
      const double g = grooming_budget(p, C, m);
      if (g > gmax) {
        gmax = g;
        best = m;
      }
    }
    lo = std::max(1.0, best - 2 * step);
    hi = best + 2 * step;
  }
  return best;
}

void criterion1() {
  bool ok = true;
  std::vector<std::string> bad;
  auto expect = [&](bool c, const std::string& what) {
    if (!c) {
      ok = false;
      bad.push_back(what);
    }
  };
  for (double alpha : {0.0, 0.5, 1.034927, 3.0}) expect(grooming_cost(0.0, alpha) == 1.0, "v(0)");
  expect(close_rel(grooming_cost(1.0, 1.034927), 2.034927, 1e-15), "v(1) Twitter");
  expect(grooming_cost(2.0, 2.0) == 5.0, "v(2; 2)");
  for (double a : {0.3, 1.0, 1.7})
    for (int T : {1, 100}) expect(grooming_budget({a, 1.3, T, 1.0}, 50.0, 1.0) == 0.0, "G(m=1)");
  for (double m : {1.5, 4.0, 30.0})
    expect(close_rel(grooming_budget({1.0, 1.2, 100, 1.0}, 70.0, m), 1.2 * 70.0 * (1 - 1 / m) / 100.0, 1e-14),
           "G(a=1)");
  expect(target_mean_strength(10.0, 10.0, 1.7) == 1.0, "m(C=N)");
  expect(close_rel(target_mean_strength(60.0, 4.0, 1.0), 15.0, 1e-15), "m(a=1)");
  expect(close_rel(target_mean_strength(1000.0, 10.0, 2.0), 10.0, 1e-15), "m(1000,10,2)");

  std::string peaks;
  for (double a : {1.1, 1.5, 2.0}) {
    const double peak = a / (a - 1.0);
    const double found = dense_scan_peak({a, 1.0, 100, 1.0}, 100.0, 4 * peak);
    const double rel = std::fabs(found - peak) / peak;
    peaks += fmt::format(" a={} m*={:.8f} rel={:.1e};", a, found, rel);
    expect(rel <= 1e-6, fmt::format("peak a={}", a));
  }
  std::string miss;
  for (const auto& b : bad) miss += " " + b;
  report(1, ok, "formula examples exact;" + peaks + (ok ? "" : " failed:" + miss));
}

void criterion2() {
  const std::vector<std::pair<double, double>> truth{{0.6, 1.0}, {1.2, 1.3}, {1.56, 1.48}};
  const int trials = 200, agents = 200;
  bool ok = true;
  std::string detail;
  for (std::size_t c = 0; c < truth.size(); ++c) {
    const auto [a, b] = truth[c];
    std::mt19937_64 rng(derive_seed(2, {c}));
    std::normal_distribution<double> noise(0.0, 0.1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int cover_a = 0, cover_b = 0, cover_both = 0;
    for (int t = 0; t < trials; ++t) {
      std::vector<AgentObs> obs;
      for (int i = 0; i < agents; ++i) {
        const double lm = std::log(30.0) * unit(rng);
        // u is drawn so the noiseless log N stays 5 sigma above 0; this
        // conditions on regressors only.
        const double lu_min = (a * lm + 0.5) / b;
        const double lu = lu_min + std::log(100.0) * unit(rng);
        const double lN = -a * lm + b * lu + noise(rng);
        obs.push_back({std::exp(lN), std::exp(lm), std::exp(lu)});
      }
      try {
        const auto fit = fit_tradeoff(obs);
        const bool ia = std::fabs(fit.a_hat - a) <= fit.ci95_a();
        const bool ib = std::fabs(fit.b_hat - b) <= fit.ci95_b();
        cover_a += ia;
        cover_b += ib;
        cover_both += ia && ib;
      } catch (const std::exception&) {
      }
    }
    const double ca = static_cast<double>(cover_a) / trials, cb = static_cast<double>(cover_b) / trials;
    ok = ok && ca >= 0.9 && cb >= 0.9;
    detail += fmt::format(" (a={}, b={}) cover a {:.3f} b {:.3f} joint {:.3f};", a, b, ca, cb,
                          static_cast<double>(cover_both) / trials);
  }
  report(2, ok, "95% CI coverage over 200 trials:" + detail);
}

void criterion3() {
  const double a = 1.2, alpha0 = 1.5;
  const int T = 100, M = 30, target_reps = 100;
  const double C75 = cost_quantile(synthetic_population(TwitterLike::population, T, TwitterLike::b,
                                                        TwitterLike::population_seed));
  auto problem = log_spaced_problem(a, T, C75, M);

  // Targets: geometric mean over replications of the alpha0 realizations.
  std::vector<double> lN(M, 0.0), lm(M, 0.0);
  for (int r = 0; r < target_reps; ++r) {
    const auto ledgers = run_simulation(problem.specs, {a, alpha0, T, TwitterLike::b},
                                        derive_seed(3003, {static_cast<std::uint64_t>(r)}));
    const auto pairs = realized_pairs(ledgers);
    for (int i = 0; i < M; ++i) {
      lN[i] += std::log(pairs[i].N) / target_reps;
      lm[i] += std::log(pairs[i].m) / target_reps;
    }
  }
  for (int i = 0; i < M; ++i) problem.targets[i] = {std::exp(lN[i]), std::exp(lm[i])};

  AlphaSearch search;
  search.reps = 50;
  search.seed = 4004;
  search.jobs = default_jobs();
  const auto res = optimize_alpha(problem, search);

  // Information only: e of the replication-averaged realization at alpha*.
  std::vector<double> sN(M, 0.0), sm(M, 0.0);
  for (int r = 0; r < search.reps; ++r) {
    const auto pairs = realized_pairs(run_simulation(problem.specs, {a, res.alpha, T, TwitterLike::b},
                                                     derive_seed(search.seed, {static_cast<std::uint64_t>(r)})));
    for (int i = 0; i < M; ++i) {
      sN[i] += std::log(pairs[i].N) / search.reps;
      sm[i] += std::log(pairs[i].m) / search.reps;
    }
  }
  std::vector<StrengthPair> avg;
  for (int i = 0; i < M; ++i) avg.push_back({std::exp(sN[i]), std::exp(sm[i])});
  const double e_of_mean = sim_error(problem.targets, avg);

  const bool alpha_ok = std::fabs(res.alpha - alpha0) <= 0.2;
  const bool e_ok = res.error <= 0.05;
  report(3, alpha_ok && e_ok,
         fmt::format("alpha* = {:.4f} (|diff| {:.4f} <= 0.2: {}); mean e at optimum = {:.4f} (<= 0.05: {}); "
                     "info: e of rep-averaged realization = {:.4f}",
                     res.alpha, std::fabs(res.alpha - alpha0), alpha_ok ? "yes" : "no", res.error,
                     e_ok ? "yes" : "no", e_of_mean));
}

SweepConfig scaled_sweep(std::uint64_t seed, unsigned jobs) {
  SweepConfig c;
  c.a_axis = {0.5, 2.0, 0.1};
  c.alpha_axis = {1.0, 3.0, 0.1};
  c.reps = 5;
  c.seed = seed;
  c.jobs = jobs;
  return c;
}

std::map<std::string, std::string> read_bundle(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    files[entry.path().filename().string()] = s.str();
  }
  return files;
}

void criterion4_5_7() {
  const auto root = fs::temp_directory_path() / "groom_acceptance";
  fs::remove_all(root);
  const unsigned jobs = default_jobs();

  int aic_wins = 0, slope_order = 0, both = 0;
  std::string per_seed;
  std::optional<SweepResult> first;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto r = experiment2(scaled_sweep(seed, jobs));
    if (seed == 1) write_sweep_bundle(r, root / "run_a");
    if (r.threshold) {
      const auto& t = *r.threshold;
      const bool w = t.threshold_preferred(), o = t.beta1 > t.beta2;
      aic_wins += w;
      slope_order += o;
      both += w && o;
      per_seed += fmt::format(" s{}: b1={:.3f} b2={:.3f} dAIC={:.2f};", seed, t.beta1, t.beta2,
                              t.aic_threshold - t.aic_linear);
    } else {
      per_seed += fmt::format(" s{}: fit error;", seed);
    }
    if (seed == 1) first = std::move(r);
  }
  report(4, both >= 8,
         fmt::format("AIC(threshold) < AIC(linear) and b1 > b2 in {}/10 seeds (AIC alone {}/10, b1 > b2 alone {}/10);{}",
                     both, aic_wins, slope_order, per_seed));

  const RatioFit* k1 = nullptr;
  const RatioFit* k10 = nullptr;
  for (const auto& f : first->ratio_fits) {
    if (f.k == 1) k1 = &f;
    if (f.k == 10) k10 = &f;
  }
  if (!k1 || !k10) {
    report(5, false, "ratio regressions for k = 1 or k = 10 unavailable");
  } else {
    const bool ok = k1->slope > 0 && k1->p < 0.05 && 3 * std::fabs(k10->slope) <= std::fabs(k1->slope);
    report(5, ok,
           fmt::format("seed 1: H1/H2 slope {:.4f} (p = {:.2e}); H10/H11 slope {:.4f} (ratio {:.1f})",
                       k1->slope, k1->p, k10->slope, std::fabs(k1->slope) / std::fabs(k10->slope)));
  }

  write_sweep_bundle(experiment2(scaled_sweep(1, jobs)), root / "run_b");
  write_sweep_bundle(experiment2(scaled_sweep(1, jobs == 1 ? 2 : 1)), root / "run_c");
  const auto a = read_bundle(root / "run_a"), b = read_bundle(root / "run_b"), c = read_bundle(root / "run_c");
  std::size_t csv = 0;
  for (const auto& [name, _] : a) csv += name.ends_with(".csv");
  report(7, a == b && a == c && csv > 0,
         fmt::format("{} files ({} CSV); same seed identical: {}; jobs {} vs {} identical: {}", a.size(), csv,
                     a == b ? "yes" : "no", jobs, jobs == 1 ? 2 : 1, a == c ? "yes" : "no"));
  fs::remove_all(root);
}

void criterion6() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> d;
  for (int i = 0; i < 100000; ++i) d.push_back(std::pow(1.0 - u(rng), -1.0 / 1.5));
  const auto fit = fit_powerlaw(d);

  const std::vector<double> small{1.2, 1.9, 2.5, 3.3, 4.0, 7.1, 9.9, 15.0, 40.0, 120.0, 2.0};
  long double sl = 0;
  for (double x : small) sl += std::log(static_cast<long double>(x));
  const double closed = static_cast<double>(1.0L + small.size() / sl);
  const double got = fit_powerlaw(small).phi;
  const bool closed_ok = close_rel(got, closed, 1e-14);
  const bool recover_ok = std::fabs(fit.phi - 2.5) <= 0.02;
  report(6, closed_ok && recover_ok,
         fmt::format("closed form {:.15f} vs {:.15f}; phi_hat from 1e5 samples = {:.4f}", got, closed, fit.phi));
}

void criterion8() {
  const char* path = std::getenv("GROOM_TWITTER_EVENTS");
  if (!path) {
    std::cout << "SKIP criterion 8: set GROOM_TWITTER_EVENTS to a Twitter event CSV (optional)" << std::endl;
    return;
  }
  try {
    std::ifstream in(path);
    const auto events = read_events(in);
    const auto agents = summarize_agents(build_dyads(events), events, 1.0);
    std::vector<AgentObs> obs;
    for (const auto& ag : agents) obs.push_back({static_cast<double>(ag.N), ag.m, static_cast<double>(ag.u)});
    const auto fit = fit_tradeoff(obs);
    const bool ok = std::fabs(fit.a_hat - 1.18957) <= 0.1;
    std::cout << fmt::format("{} criterion 8 (optional): a_hat = {:.5f}", ok ? "PASS" : "FAIL", fit.a_hat)
              << std::endl;
  } catch (const std::exception& e) {
    std::cout << "FAIL criterion 8 (optional): " << e.what() << std::endl;
  }
}

template <class F>
void timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    f();
  } catch (const std::exception& e) {
    std::cout << "FAIL (exception) " << e.what() << std::endl;
    ++required_failures;
  }
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  std::cout << fmt::format("  ({:.1f} s)", dt.count()) << std::endl;
}

}  // namespace

int main() {
  timed(criterion1);
  timed(criterion2);
  timed(criterion3);
  timed(criterion4_5_7);
  timed(criterion6);
  timed(criterion8);
  std::cout << fmt::format("{} required criteria failed", required_failures) << std::endl;
  return required_failures == 0 ? 0 : 1;
}
