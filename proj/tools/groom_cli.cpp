// groom: command-line front end for ingestion, fitting, simulation and
// the two simulation experiments.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "groom/experiments.hpp"
#include "groom/ingest.hpp"
#include "groom/model.hpp"
#include "groom/parallel.hpp"
#include "groom/report.hpp"
#include "groom/statfit.hpp"

namespace {

using namespace groom;
namespace fs = std::filesystem;

constexpr std::uint64_t kDefaultSeed = 20190501;

struct Common {
  std::uint64_t seed = kDefaultSeed;
  std::string out = "out";
  unsigned jobs = default_jobs();
  int verbose = 0;
};

void add_common(CLI::App* cmd, Common& c, bool with_jobs = true) {
  cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  if (with_jobs)
    cmd->add_option("--jobs", c.jobs, "Worker threads (output does not depend on this)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  cmd->add_flag("-v,--verbose", c.verbose, "More progress output");
}

class Stopwatch {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::vector<InteractionEvent> load_events(const std::string& path, std::optional<int> T) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", path));
  return read_events(in, T);
}

std::vector<AgentObs> observations(const std::vector<AgentSummary>& agents) {
  std::vector<AgentObs> obs;
  obs.reserve(agents.size());
  for (const auto& g : agents) obs.push_back({static_cast<double>(g.N), g.m, static_cast<double>(g.u)});
  return obs;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  Common common;
  std::string input;
  std::optional<int> T;
  double b = 1.0;
};

int run_ingest(const IngestArgs& args) {
  auto events = load_events(args.input, args.T);
  int T = args.T.value_or(0);
  if (!args.T)
    for (const auto& e : events) T = std::max(T, e.day + 1);
  const auto ledger = build_dyads(events);
  const auto agents = summarize_agents(ledger, events, args.b);
  const auto curves = grooming_curves(events, std::max(T, 1));
  write_ingest_bundle(ledger, agents, curves, args.common.out);
  fmt::print("events: {}\ndyads: {}\nagents: {}\ncurve bins: {}\n", events.size(), ledger.size(),
             agents.size(), curves.by_strength.size());
  return 0;
}

struct FitArgs {
  Common common;
  std::string agents;
};

int run_fit(const FitArgs& args) {
  const auto agents = read_agents_csv(args.agents);
  const auto fit = fit_tradeoff(observations(agents));
  ensure_directory(args.common.out);
  write_tradeoff_json(fit, fs::path(args.common.out) / "tradeoff_fit.json");
  fmt::print("n = {}  adj R^2 = {:.3f}\n", fit.n, fit.adj_r2);
  fmt::print("a = {:.5f} (se {:.5f}, t vs 1 = {:.3f}, p = {:.3g})\n", fit.a_hat, fit.se_a, fit.t_a, fit.p_a);
  fmt::print("b = {:.5f} (se {:.5f}, t vs 0 = {:.3f}, p = {:.3g})\n", fit.b_hat, fit.se_b, fit.t_b, fit.p_b);
  return 0;
}

struct SimArgs {
  Common common;
  double a = TwitterLike::a;
  double alpha = TwitterLike::alpha;
  int T = TwitterLike::T;
  double C = 0.0;
  int M = 30;
};

int run_simulate(const SimArgs& args) {
  Stopwatch clock;
  double C = args.C;
  if (C <= 0.0)
    C = cost_quantile(synthetic_population(TwitterLike::population, args.T, TwitterLike::b,
                                           TwitterLike::population_seed));
  const auto problem = log_spaced_problem(args.a, args.T, C, args.M);
  const ModelParams params{args.a, args.alpha, args.T, 1.0};
  const auto ledgers = run_simulation(problem.specs, params, args.common.seed);
  write_simulation_bundle(problem.specs, ledgers, params, args.common.out);
  const double e = sim_error(problem.targets, realized_pairs(ledgers));
  fmt::print("groomers: {}  C = {:.4g}  e = {:.6f}\n", problem.specs.size(), C, e);
  fmt::print("wall clock: {:.3f} s\n", clock.seconds());
  return 0;
}

struct Exp1Args {
  Common common;
  std::string events;
  std::string agents;
  std::optional<double> a, b;
  std::optional<int> T;
  int M = 30;
  int reps = 10;
};

int run_exp1(const Exp1Args& args) {
  Stopwatch clock;
  Exp1Dataset data;
  if (!args.events.empty()) {
    const auto events = load_events(args.events, args.T);
    // a and b default to the trade-off regression on the same data.
    int T = args.T.value_or(0);
    if (!args.T)
      for (const auto& e : events) T = std::max(T, e.day + 1);
    double a = args.a.value_or(0.0), b = args.b.value_or(0.0);
    if (!args.a || !args.b) {
      const auto ledger = build_dyads(events);
      const auto fit = fit_tradeoff(observations(summarize_agents(ledger, events, 1.0)));
      if (!args.a) a = fit.a_hat;
      if (!args.b) b = fit.b_hat;
      if (args.common.verbose) fmt::print(stderr, "trade-off fit: a = {:.5f}, b = {:.5f}\n", fit.a_hat, fit.b_hat);
    }
    data = dataset_from_events(events, a, b, T);
  } else if (!args.agents.empty()) {
    if (!args.a || !args.T) throw CLI::ValidationError("--agents requires --a and --T");
    data.a = *args.a;
    data.b = args.b.value_or(1.0);
    data.T = *args.T;
    data.agents = read_agents_csv(args.agents);
  } else {
    throw CLI::ValidationError("exp1 needs --events or --agents");
  }

  Exp1Config config;
  config.M = args.M;
  config.seed = args.common.seed;
  config.search.reps = args.reps;
  config.search.jobs = args.common.jobs;
  const auto result = experiment1(data, config);
  write_exp1_bundle(result, args.common.out);
  fmt::print("a = {:.5f}  T = {}  C75 = {:.4g}\n", result.a, result.T, result.C75);
  fmt::print("alpha* = {:.6f}  e = {:.6f}{}\n", result.alpha.alpha, result.alpha.error,
             result.alpha.flat ? "  (flat objective: alpha not identifiable)" : "");
  if (result.correlation)
    fmt::print("budget correlation r = {:.4f} (p = {:.3g}, n = {})\n", result.correlation->r,
               result.correlation->p, result.correlation->n);
  const auto evals = result.alpha.evaluated.size() * static_cast<std::size_t>(args.reps);
  const double secs = clock.seconds();
  fmt::print("wall clock: {:.2f} s  ({:.1f} simulations/s)\n", secs, evals / std::max(secs, 1e-9));
  return 0;
}

struct Exp2Args {
  Common common;
  SweepConfig config;
  std::string population;
  std::string selection = "per_result";
};

int run_exp2(Exp2Args args) {
  Stopwatch clock;
  auto& config = args.config;
  config.seed = args.common.seed;
  config.jobs = args.common.jobs;
  config.selection = args.selection == "per_alpha_mean" ? Selection::per_alpha_mean : Selection::per_result;
  if (!args.population.empty()) config.population = population_from_agents(read_agents_csv(args.population));
  const auto result = experiment2(config);
  write_sweep_bundle(result, args.common.out);

  fmt::print("cells: {}  selected: {}  C = {:.4g}\n", result.cells.size(), result.selected.size(), result.C);
  if (result.threshold) {
    const auto& t = *result.threshold;
    fmt::print("threshold model: b1 = {:.4f} b2 = {:.4f} b3 = {:.4f} b0 = {:.4f}  AIC = {:.2f}\n",
               t.beta1, t.beta2, t.beta3, t.beta0, t.aic_threshold);
    fmt::print("linear model:    slope = {:.4f} intercept = {:.4f}  AIC = {:.2f}\n", t.linear_slope,
               t.linear_intercept, t.aic_linear);
  } else {
    fmt::print("threshold fit unavailable: {}\n", result.threshold_error.value_or("?"));
  }
  for (const auto& f : result.ratio_fits)
    if (args.common.verbose || f.k == 1 || f.k == config.K - 1)
      fmt::print("H_{}/H_{}: slope = {:.4f} (p = {:.3g})\n", f.k, f.k + 1, f.slope, f.p);
  const double secs = clock.seconds();
  fmt::print("wall clock: {:.2f} s  ({:.1f} cells/s)\n", secs, result.cells.size() / std::max(secs, 1e-9));
  return 0;
}

struct ReportArgs {
  Common common;
  std::string input;
};

int run_report(const ReportArgs& args) {
  const auto result = load_sweep_bundle(args.input);
  write_sweep_bundle(result, args.common.out);
  fmt::print("selected: {}  a values: {}\n", result.selected.size(), result.summary.size());
  if (result.threshold)
    fmt::print("AIC threshold = {:.2f}  AIC linear = {:.2f}\n", result.threshold->aic_threshold,
               result.threshold->aic_linear);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social grooming trade-off model: ingestion, fitting and simulation experiments"};
  app.set_config("--config", "", "TOML/INI file with option values (flags override)");
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Event log -> dyads.csv, agents.csv, curves.csv");
  c_ingest->add_option("input", ingest.input, "Events CSV (actor,target,day[,count])")->required();
  c_ingest->add_option("--T", ingest.T, "Observation window in days (default: last day + 1)")
      ->check(CLI::PositiveNumber);
  c_ingest->add_option("--b", ingest.b, "Cost exponent for C = u^b")->capture_default_str();
  add_common(c_ingest, ingest.common, false);

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit-tradeoff", "Fit log N ~ -a log m + b log u");
  c_fit->add_option("agents", fit.agents, "agents.csv from ingest")->required();
  add_common(c_fit, fit.common, false);

  SimArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate log-spaced groomers for T days");
  c_sim->add_option("--a", sim.a, "Trade-off exponent")->check(CLI::PositiveNumber)->capture_default_str();
  c_sim->add_option("--alpha", sim.alpha, "Grooming-amount slope")->check(CLI::NonNegativeNumber)->capture_default_str();
  c_sim->add_option("--T", sim.T, "Days")->check(CLI::NonNegativeNumber)->capture_default_str();
  c_sim->add_option("--C", sim.C, "Total cost (default: Twitter-like 75th percentile)");
  c_sim->add_option("--M", sim.M, "Groomers")->check(CLI::PositiveNumber)->capture_default_str();
  add_common(c_sim, sim.common, false);

  Exp1Args e1;
  auto* c_e1 = app.add_subcommand("exp1", "Calibrate alpha to a data set and re-simulate it");
  c_e1->add_option("--events", e1.events, "Events CSV");
  c_e1->add_option("--agents", e1.agents, "agents.csv (no budget correlation)");
  c_e1->add_option("--a", e1.a, "Trade-off exponent (default: fitted)")->check(CLI::PositiveNumber);
  c_e1->add_option("--b", e1.b, "Cost exponent (default: fitted)");
  c_e1->add_option("--T", e1.T, "Days (default: last day + 1)")->check(CLI::PositiveNumber);
  c_e1->add_option("--M", e1.M, "Calibration groomers")->check(CLI::PositiveNumber)->capture_default_str();
  c_e1->add_option("--reps", e1.reps, "Replications per alpha candidate")->check(CLI::PositiveNumber)->capture_default_str();
  add_common(c_e1, e1.common);

  Exp2Args e2;
  auto& sc = e2.config;
  auto* c_e2 = app.add_subcommand("exp2", "Sweep (a, alpha) and analyse the lowest-error cells");
  c_e2->add_option("--a-lo", sc.a_axis.lo)->capture_default_str();
  c_e2->add_option("--a-hi", sc.a_axis.hi)->capture_default_str();
  c_e2->add_option("--a-step", sc.a_axis.step)->check(CLI::PositiveNumber)->capture_default_str();
  c_e2->add_option("--alpha-lo", sc.alpha_axis.lo)->capture_default_str();
  c_e2->add_option("--alpha-hi", sc.alpha_axis.hi)->capture_default_str();
  c_e2->add_option("--alpha-step", sc.alpha_axis.step)->check(CLI::PositiveNumber)->capture_default_str();
  c_e2->add_option("--reps", sc.reps)->check(CLI::PositiveNumber)->capture_default_str();
  c_e2->add_option("--T", sc.T)->check(CLI::PositiveNumber)->capture_default_str();
  c_e2->add_option("--C", sc.C, "Calibration cost (default: 75th percentile of population C)");
  c_e2->add_option("--M", sc.M)->check(CLI::PositiveNumber)->capture_default_str();
  c_e2->add_option("--select", sc.select, "Lowest-e units kept per a")->check(CLI::PositiveNumber)->capture_default_str();
  c_e2->add_option("--selection", e2.selection, "per_result or per_alpha_mean")
      ->check(CLI::IsMember({"per_result", "per_alpha_mean"}))
      ->capture_default_str();
  c_e2->add_option("--threshold", sc.threshold)->capture_default_str();
  c_e2->add_option("--K", sc.K, "Hierarchy levels")->check(CLI::Range(2, 1000))->capture_default_str();
  c_e2->add_option("--population", e2.population, "agents.csv used for re-runs (default: synthetic)");
  add_common(c_e2, e2.common);

  ReportArgs rep;
  auto* c_rep = app.add_subcommand("report", "Re-derive summaries, fits and plots from an exp2 bundle");
  c_rep->add_option("--in", rep.input, "exp2 output directory")->required();
  add_common(c_rep, rep.common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*c_ingest) return run_ingest(ingest);
    if (*c_fit) return run_fit(fit);
    if (*c_sim) return run_simulate(sim);
    if (*c_e1) return run_exp1(e1);
    if (*c_e2) return run_exp2(e2);
    if (*c_rep) return run_report(rep);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
