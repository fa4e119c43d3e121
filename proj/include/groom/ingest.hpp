#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace groom {

/// One directed grooming record: `count` acts from actor to target on `day`.
struct InteractionEvent {
  std::string actor;
  std::string target;
  int day = 0;
  int count = 1;
};

/// Malformed input, tagged with the 1-based line number of the offending row
/// (0 when the problem is not tied to a row).
class IngestError : public std::runtime_error {
 public:
  IngestError(std::size_t line, const std::string& what);
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Parses `actor,target,day[,count]` CSV with a header row. When `T` is
/// given, days outside [0, T) are rejected.
std::vector<InteractionEvent> read_events(std::istream& in, std::optional<int> T = std::nullopt);

/// Checks actor != target, day >= 0 (and < T when given), count >= 1.
/// Row numbers in errors count the header as line 1.
void validate_events(const std::vector<InteractionEvent>& events, std::optional<int> T = std::nullopt);

using DyadKey = std::pair<std::string, std::string>;

/// Directed dyad -> number of distinct days with at least one act.
using DyadLedger = std::map<DyadKey, int>;

DyadLedger build_dyads(const std::vector<InteractionEvent>& events);

struct AgentSummary {
  std::string id;
  int N = 0;
  double m = 0.0;
  int u = 0;
  double C = 0.0;
};

/// Per-actor (N, m, u, C = u^b), sorted by id. u counts distinct actor-side
/// days; agents without ties are omitted.
std::vector<AgentSummary> summarize_agents(const DyadLedger& ledger,
                                           const std::vector<InteractionEvent>& events, double b);

/// Total acts per actor summed over all events.
std::map<std::string, long long> total_acts(const std::vector<InteractionEvent>& events);

/// Observed reinforcement amount per day: (total acts - N) / T.
double actual_daily_grooming(long long acts, int N, int T);

struct CurveRow {
  double x = 0.0;
  double p25 = 0.0, p50 = 0.0, p75 = 0.0;
  std::size_t n = 0;
};

struct DensityCurve {
  int horizon = 0;
  std::vector<CurveRow> rows;
};

struct GroomingCurves {
  std::vector<CurveRow> by_strength;    // x = d
  std::vector<DensityCurve> by_density; // x = d(t)/t at t in {T, 0.9T, 0.8T}
};

/// Bins with more than this many dyads are reported.
inline constexpr std::size_t kMinCurveSamples = 20;

/// Percentiles of each dyad's mean acts per active day, binned by strength
/// and by density at three horizons. Sparse bins are dropped.
GroomingCurves grooming_curves(const std::vector<InteractionEvent>& events, int T);

}  // namespace groom
