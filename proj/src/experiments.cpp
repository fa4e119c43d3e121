#include "groom/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "groom/parallel.hpp"

namespace groom {

namespace {

constexpr std::uint64_t kRerunTag = 0x7265727531ULL;
constexpr std::uint64_t kResimTag = 0x726573696dULL;

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<GroomerSpec> population_specs(const std::vector<PopulationAgent>& population, double a) {
  std::vector<GroomerSpec> specs;
  specs.reserve(population.size());
  for (const auto& p : population) specs.push_back(GroomerSpec::make(p.id, p.C, p.N, a));
  return specs;
}

}  // namespace

std::vector<PopulationAgent> synthetic_population(int M, int T, double b, std::uint64_t seed) {
  if (M < 1 || T < 1) throw std::invalid_argument("synthetic_population: need M >= 1 and T >= 1");
  Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(M), static_cast<std::uint64_t>(T)}));
  std::vector<PopulationAgent> out;
  out.reserve(M);
  const double u_lo = std::max(1.0, T / 10.0);
  for (int i = 0; i < M; ++i) {
    const double u = std::min<double>(T, std::ceil(u_lo * std::pow(T / u_lo, uniform01(rng))));
    const double C = std::pow(u, b);
    const double s = 0.3 + 0.6 * uniform01(rng);
    const int N = static_cast<int>(std::clamp<long>(std::lround(std::pow(C, s)), 1, T));
    out.push_back({fmt::format("p{:04d}", i), C, N});
  }
  return out;
}

std::vector<PopulationAgent> population_from_agents(const std::vector<AgentSummary>& agents) {
  std::vector<PopulationAgent> out;
  out.reserve(agents.size());
  for (const auto& g : agents) out.push_back({g.id, g.C, g.N});
  return out;
}

double cost_quantile(const std::vector<PopulationAgent>& population, double q) {
  std::vector<double> c;
  c.reserve(population.size());
  for (const auto& p : population) c.push_back(p.C);
  std::sort(c.begin(), c.end());
  return quantile_sorted(c, q);
}

std::vector<double> pooled_strengths(const std::vector<SimLedger>& ledgers) {
  std::vector<double> out;
  for (const auto& l : ledgers) out.insert(out.end(), l.strengths.begin(), l.strengths.end());
  return out;
}

// ---------------------------------------------------------------------------

Exp1Dataset dataset_from_events(const std::vector<InteractionEvent>& events, double a, double b,
                                std::optional<int> T) {
  Exp1Dataset data;
  data.a = a;
  data.b = b;
  if (T) {
    data.T = *T;
  } else {
    int last = 0;
    for (const auto& e : events) last = std::max(last, e.day);
    data.T = last + 1;
  }
  validate_events(events, data.T);
  const auto ledger = build_dyads(events);
  data.agents = summarize_agents(ledger, events, b);
  for (const auto& [key, d] : ledger) data.strengths.push_back(d);
  const auto acts = total_acts(events);
  for (const auto& g : data.agents) data.acts.push_back(acts.at(g.id));
  return data;
}

Exp1Result experiment1(const Exp1Dataset& data, const Exp1Config& config) {
  if (!(data.a > 0.0)) throw std::invalid_argument("experiment1: a must be > 0");
  if (data.T < 1) throw std::invalid_argument("experiment1: T must be >= 1");
  if (data.agents.empty()) throw std::invalid_argument("experiment1: data set has no agents");
  if (!data.acts.empty() && data.acts.size() != data.agents.size())
    throw std::invalid_argument("experiment1: acts must align with agents");

  Exp1Result out;
  out.a = data.a;
  out.b = data.b;
  out.T = data.T;
  out.C75 = cost_quantile(population_from_agents(data.agents));
  out.data_strengths = data.strengths;

  const auto problem = log_spaced_problem(data.a, data.T, out.C75, config.M);
  auto search = config.search;
  search.seed = config.seed;
  out.alpha = optimize_alpha(problem, search);

  const auto population = population_from_agents(data.agents);
  const auto specs = population_specs(population, data.a);
  const ModelParams params{data.a, out.alpha.alpha, data.T, data.b};
  const auto ledgers = run_simulation(specs, params, derive_seed(config.seed, {kResimTag}));
  out.sim_strengths = pooled_strengths(ledgers);

  std::vector<double> pred, actual;
  for (std::size_t i = 0; i < data.agents.size(); ++i) {
    const auto& g = data.agents[i];
    Exp1Row row;
    row.id = g.id;
    row.C = g.C;
    row.N = g.N;
    row.m = g.m;
    row.N_sim = ledgers[i].ties();
    row.m_sim = ledgers[i].mean_strength();
    row.G_pred = grooming_budget(params, g.C, g.m);
    if (!data.acts.empty()) row.G_actual = actual_daily_grooming(data.acts[i], g.N, data.T);
    if (row.G_actual && *row.G_actual > 0.0 && row.G_pred > 0.0) {
      pred.push_back(row.G_pred);
      actual.push_back(*row.G_actual);
    }
    out.rows.push_back(std::move(row));
  }
  if (data.acts.empty()) {
    out.correlation_note = "no event counts supplied";
  } else {
    try {
      out.correlation = budget_correlation(pred, actual);
    } catch (const EstimationError& e) {
      out.correlation_note = e.what();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> GridAxis::values() const {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument(fmt::format("invalid grid [{}, {}] step {}", lo, hi, step));
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> out;
  for (long i = 0; i <= count; ++i)
    out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e10) / 1e10);
  return out;
}

void SweepConfig::validate() const {
  (void)a_axis.values();
  (void)alpha_axis.values();
  if (!(a_axis.lo > 0.0)) throw std::invalid_argument("sweep: a must be > 0");
  if (!(alpha_axis.lo >= 0.0)) throw std::invalid_argument("sweep: alpha must be >= 0");
  if (reps < 1) throw std::invalid_argument("sweep: reps must be >= 1");
  if (T < 1) throw std::invalid_argument("sweep: T must be >= 1");
  if (M < 1) throw std::invalid_argument("sweep: M must be >= 1");
  if (select < 1) throw std::invalid_argument("sweep: select must be >= 1");
  if (K < 2) throw std::invalid_argument("sweep: K must be >= 2");
  if (C < 0.0) throw std::invalid_argument("sweep: C must be > 0 (or 0 for the population default)");
}

std::uint64_t cell_seed(std::uint64_t master, std::size_t ia, std::size_t ialpha, int rep) {
  return derive_seed(master, {ia, ialpha, static_cast<std::uint64_t>(rep)});
}

std::uint64_t rerun_seed(std::uint64_t master, std::size_t ia, std::size_t ialpha, int rep) {
  return derive_seed(master, {ia, ialpha, static_cast<std::uint64_t>(rep), kRerunTag});
}

namespace {

void sweep_error(SweepCell& cell, const SweepConfig& config, double C) {
  const auto problem = log_spaced_problem(cell.a, config.T, C, config.M);
  const ModelParams params{cell.a, cell.alpha, config.T, 1.0};
  const auto ledgers = run_simulation(problem.specs, params, cell.seed);
  cell.realized = realized_pairs(ledgers);
  cell.e = sim_error(problem.targets, cell.realized);
}

void population_rerun(SweepCell& cell, const SweepConfig& config,
                      const std::vector<PopulationAgent>& population) {
  const auto specs = population_specs(population, cell.a);
  const ModelParams params{cell.a, cell.alpha, config.T, 1.0};
  const auto ledgers =
      run_simulation(specs, params, rerun_seed(config.seed, cell.ia, cell.ialpha, cell.rep));
  const auto strengths = pooled_strengths(ledgers);
  try {
    cell.phi = fit_powerlaw(strengths).phi;
  } catch (const EstimationError&) {
    cell.phi.reset();
  }
  cell.H = hierarchy_profile(strengths, HierarchyMode::sim, config.K).H;
}

SweepCell blank_cell(const SweepConfig& config, const std::vector<double>& as,
                     const std::vector<double>& alphas, std::size_t ia, std::size_t ialpha, int rep) {
  SweepCell cell;
  cell.a = as.at(ia);
  cell.alpha = alphas.at(ialpha);
  cell.ia = ia;
  cell.ialpha = ialpha;
  cell.rep = rep;
  cell.seed = cell_seed(config.seed, ia, ialpha, rep);
  return cell;
}

}  // namespace

SweepCell compute_cell(const SweepConfig& config, const std::vector<PopulationAgent>& population,
                       double C, std::size_t ia, std::size_t ialpha, int rep, bool rerun) {
  auto cell = blank_cell(config, config.a_axis.values(), config.alpha_axis.values(), ia, ialpha, rep);
  sweep_error(cell, config, C);
  if (rerun) population_rerun(cell, config, population);
  return cell;
}

std::vector<std::vector<std::size_t>> select_lowest(const std::vector<SweepCell>& cells, int select,
                                                    Selection mode) {
  const auto take_n = static_cast<std::size_t>(std::max(select, 0));
  std::vector<std::vector<std::size_t>> out;

  if (mode == Selection::per_result) {
    std::map<std::size_t, std::vector<std::size_t>> by_a;
    for (std::size_t i = 0; i < cells.size(); ++i) by_a[cells[i].ia].push_back(i);
    for (auto& [ia, idx] : by_a) {
      std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
        const auto& p = cells[x];
        const auto& q = cells[y];
        return std::tie(p.e, p.alpha, p.rep) < std::tie(q.e, q.alpha, q.rep);
      });
      idx.resize(std::min(idx.size(), take_n));
      for (auto i : idx) out.push_back({i});
    }
  } else {
    // (ia, ialpha) -> member indices
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < cells.size(); ++i) groups[{cells[i].ia, cells[i].ialpha}].push_back(i);
    std::map<std::size_t, std::vector<std::tuple<double, double, std::vector<std::size_t>>>> by_a;
    for (auto& [key, idx] : groups) {
      double sum = 0.0;
      for (auto i : idx) sum += cells[i].e;
      std::sort(idx.begin(), idx.end(), [&](auto x, auto y) { return cells[x].rep < cells[y].rep; });
      by_a[key.first].emplace_back(sum / static_cast<double>(idx.size()), cells[idx.front()].alpha, idx);
    }
    for (auto& [ia, list] : by_a) {
      std::sort(list.begin(), list.end());
      list.resize(std::min(list.size(), take_n));
      for (auto& item : list) out.push_back(std::get<2>(item));
    }
  }
  std::sort(out.begin(), out.end(), [&](const auto& x, const auto& y) {
    const auto& p = cells[x.front()];
    const auto& q = cells[y.front()];
    return std::tie(p.ia, p.ialpha, p.rep) < std::tie(q.ia, q.ialpha, q.rep);
  });
  return out;
}

void analyse_selection(SweepResult& result) {
  const auto& config = result.config;
  result.summary.clear();
  result.ratio_fits.clear();
  result.threshold.reset();
  result.threshold_error.reset();

  std::map<double, std::vector<const SelectedCell*>> by_a;
  for (const auto& s : result.selected) by_a[s.a].push_back(&s);

  std::vector<std::pair<double, double>> phi_points;
  for (const auto& [a, cells] : by_a) {
    std::vector<double> alphas, phis;
    for (const auto* c : cells) {
      alphas.push_back(c->alpha);
      if (std::isfinite(c->phi)) {
        phis.push_back(c->phi);
        phi_points.emplace_back(a, c->phi);
      }
    }
    ASummary s;
    s.a = a;
    s.selected = cells.size();
    s.short_selection = cells.size() < static_cast<std::size_t>(config.select);
    s.alpha_mean = mean_of(alphas);
    s.alpha_sd = sd_of(alphas);
    s.phi_mean = phis.empty() ? std::nan("") : mean_of(phis);
    s.phi_sd = phis.empty() ? std::nan("") : sd_of(phis);
    result.summary.push_back(s);
  }

  try {
    result.threshold = threshold_fit(phi_points, config.threshold);
  } catch (const EstimationError& e) {
    result.threshold_error = e.what();
  }

  for (int k = 1; k < config.K; ++k) {
    std::vector<double> y, x, one;
    for (const auto& s : result.selected) {
      if (static_cast<std::size_t>(k - 1) >= s.ratios.size() || !s.ratios[k - 1]) continue;
      y.push_back(*s.ratios[k - 1]);
      x.push_back(s.a);
      one.push_back(1.0);
    }
    try {
      const auto fit = linear_fit_aic(y, {x, one});
      result.ratio_fits.push_back({k, fit.beta[0], fit.beta[1], fit.se[0], fit.p[0], fit.n});
    } catch (const EstimationError&) {
      // too few defined ratios at this k
    }
  }
}

SweepResult experiment2(SweepConfig config) {
  config.validate();
  if (config.population.empty())
    config.population = synthetic_population(TwitterLike::population, config.T, TwitterLike::b,
                                             TwitterLike::population_seed);
  SweepResult result;
  result.C = config.C > 0.0 ? config.C : cost_quantile(config.population);
  result.config = config;

  const auto as = config.a_axis.values();
  const auto alphas = config.alpha_axis.values();
  const std::size_t per_a = alphas.size() * static_cast<std::size_t>(config.reps);
  auto& cells = result.cells;
  cells.resize(as.size() * per_a);
  for (std::size_t ia = 0; ia < as.size(); ++ia)
    for (std::size_t il = 0; il < alphas.size(); ++il)
      for (int r = 0; r < config.reps; ++r)
        cells[ia * per_a + il * config.reps + r] = blank_cell(config, as, alphas, ia, il, r);

  parallel_for(cells.size(), config.jobs,
               [&](std::size_t i) { sweep_error(cells[i], config, result.C); });

  const auto chosen = select_lowest(cells, config.select, config.selection);
  std::vector<std::size_t> rerun_idx;
  for (const auto& group : chosen) rerun_idx.insert(rerun_idx.end(), group.begin(), group.end());
  parallel_for(rerun_idx.size(), config.jobs, [&](std::size_t i) {
    population_rerun(cells[rerun_idx[i]], config, config.population);
  });

  for (const auto& group : chosen) {
    SelectedCell s;
    s.a = cells[group.front()].a;
    s.alpha = cells[group.front()].alpha;
    s.H.assign(config.K, 0);
    std::vector<double> es, phis;
    for (auto i : group) {
      const auto& c = cells[i];
      s.reps.push_back(c.rep);
      es.push_back(c.e);
      if (c.phi) phis.push_back(*c.phi);
      for (int k = 0; k < config.K; ++k) s.H[k] += c.H[k];
    }
    s.e_mean = mean_of(es);
    s.phi = phis.empty() ? std::nan("") : mean_of(phis);
    s.ratios = hierarchy_ratios(HierarchyProfile{s.H, HierarchyMode::sim});
    result.selected.push_back(std::move(s));
  }
  analyse_selection(result);
  return result;
}

}  // namespace groom
