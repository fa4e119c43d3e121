#include "groom/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace groom {

int poisson(Rng& rng, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument(fmt::format("poisson: invalid rate {}", lambda));
  if (lambda == 0.0) return 0;
  const double u = uniform01(rng);
  double p = std::exp(-lambda);
  double cdf = p;
  int k = 0;
  // cdf can stall just below 1 for large k; the cap keeps the loop finite.
  while (u >= cdf && k < 10000) {
    ++k;
    p *= lambda / k;
    cdf += p;
  }
  return k;
}

void ModelParams::validate() const {
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::invalid_argument(fmt::format("trade-off exponent a must be > 0 (got {})", a));
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument(fmt::format("alpha must be >= 0 (got {})", alpha));
  if (T < 0) throw std::invalid_argument(fmt::format("T must be >= 0 (got {})", T));
  if (!std::isfinite(b)) throw std::invalid_argument("b must be finite");
}

GroomerSpec GroomerSpec::make(std::string id, double C, int N_target, double a) {
  if (N_target < 1)
    throw std::invalid_argument(fmt::format("N_target must be >= 1 (got {})", N_target));
  return GroomerSpec{std::move(id), C, N_target, target_mean_strength(C, N_target, a)};
}

double SimLedger::mean_strength() const {
  if (strengths.empty()) return 0.0;
  return std::accumulate(strengths.begin(), strengths.end(), 0.0) /
         static_cast<double>(strengths.size());
}

double grooming_cost(double w, double alpha) {
  if (!(w >= 0.0)) throw std::invalid_argument(fmt::format("density w must be >= 0 (got {})", w));
  if (!(alpha >= 0.0)) throw std::invalid_argument(fmt::format("alpha must be >= 0 (got {})", alpha));
  return alpha * w + 1.0;
}

double grooming_budget(const ModelParams& params, double C, double m) {
  params.validate();
  if (params.T < 1) throw std::invalid_argument("grooming_budget: T must be >= 1");
  if (!(C > 0.0)) throw std::invalid_argument(fmt::format("cost C must be > 0 (got {})", C));
  if (!(m >= 1.0))
    throw std::invalid_argument(fmt::format("mean strength m must be >= 1 (got {})", m));
  const double a = params.a;
  // m^(1-a) - m^(-a) = m^(-a) (m - 1); the factored form is exact at m = 1.
  return params.alpha * C * std::pow(m, -a) * (m - 1.0) / params.T;
}

double target_mean_strength(double C, double N, double a) {
  if (!(C > 0.0) || !(N >= 1.0) || !(a > 0.0))
    throw std::invalid_argument(
        fmt::format("target_mean_strength: need C > 0, N >= 1, a > 0 (got {}, {}, {})", C, N, a));
  return std::pow(C / N, 1.0 / a);
}

double daily_budget(const ModelParams& params, const GroomerSpec& spec) {
  if (spec.m_target <= 1.0) return 0.0;
  return grooming_budget(params, spec.C, spec.m_target);
}

DayStats simulate_day(SimLedger& ledger, const GroomerSpec& spec,
                      const ModelParams& params, int t, Rng& rng) {
  if (t < 1 || t > params.T)
    throw std::invalid_argument(fmt::format("day {} outside [1, {}]", t, params.T));
  if (ledger.strengths.empty())
    throw std::invalid_argument("ledger must hold the initial tie");

  DayStats stats;
  stats.budget = daily_budget(params, spec);
  double R = stats.budget;

  const double rate = static_cast<double>(spec.N_target - 1) / params.T;
  stats.created = poisson(rng, rate);
  ledger.strengths.insert(ledger.strengths.end(), stats.created, 1.0);

  // Eligible partners for today; removed by swap once groomed.
  std::vector<std::size_t> open(ledger.strengths.size());
  std::iota(open.begin(), open.end(), std::size_t{0});

  auto& d = ledger.strengths;
  while (R > 0.0 && !open.empty()) {
    double total = 0.0;
    for (auto j : open) total += d[j];
    const double target = uniform01(rng) * total;
    std::size_t pick = open.size() - 1;
    double acc = 0.0;
    for (std::size_t k = 0; k < open.size(); ++k) {
      acc += d[open[k]];
      if (target < acc) {
        pick = k;
        break;
      }
    }
    const std::size_t j = open[pick];
    open[pick] = open.back();
    open.pop_back();

    const double v = grooming_cost(d[j] / t, params.alpha);
    if (R >= v) {
      d[j] += 1.0;
      R -= v;
      stats.spent += v;
    } else {
      d[j] += R / v;
      stats.spent += R;
      R = 0.0;
    }
    ++stats.reinforced;
  }
  ledger.day = t;
  return stats;
}

SimLedger simulate_groomer(const GroomerSpec& spec, const ModelParams& params, Rng& rng) {
  auto ledger = SimLedger::initial();
  for (int t = 1; t <= params.T; ++t) simulate_day(ledger, spec, params, t, rng);
  return ledger;
}

std::vector<SimLedger> run_simulation(std::span<const GroomerSpec> specs,
                                      const ModelParams& params, std::uint64_t seed) {
  params.validate();
  if (specs.empty()) throw std::invalid_argument("run_simulation: no groomers");
  std::vector<SimLedger> out;
  out.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    Rng rng(derive_seed(seed, {i}));
    out.push_back(simulate_groomer(specs[i], params, rng));
  }
  return out;
}

}  // namespace groom
