#include "groom/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <set>
#include <string_view>

#include <fmt/format.h>

#include "groom/statfit.hpp"

namespace groom {

IngestError::IngestError(std::size_t line, const std::string& what)
    : std::runtime_error(line ? fmt::format("line {}: {}", line, what) : what), line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int parse_int(std::string_view s, std::size_t line, const char* field) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw IngestError(line, fmt::format("{} '{}' is not an integer", field, s));
  return v;
}

void check_event(const InteractionEvent& e, std::size_t line, std::optional<int> T) {
  if (e.actor.empty() || e.target.empty()) throw IngestError(line, "empty agent id");
  if (e.actor == e.target) throw IngestError(line, fmt::format("self-loop on '{}'", e.actor));
  if (e.day < 0) throw IngestError(line, fmt::format("day {} is negative", e.day));
  if (T && e.day >= *T) throw IngestError(line, fmt::format("day {} outside window [0, {})", e.day, *T));
  if (e.count < 1) throw IngestError(line, fmt::format("count {} must be >= 1", e.count));
}

}  // namespace

std::vector<InteractionEvent> read_events(std::istream& in, std::optional<int> T) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError(1, "missing header 'actor,target,day[,count]'");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split(line);
  const bool has_count = header.size() == 4 && header[3] == "count";
  if (header.size() < 3 || header[0] != "actor" || header[1] != "target" || header[2] != "day" ||
      (header.size() == 4 && !has_count) || header.size() > 4)
    throw IngestError(1, fmt::format("bad header '{}', expected 'actor,target,day[,count]'", trim(line)));

  std::vector<InteractionEvent> events;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cols = split(line);
    if (cols.size() != header.size())
      throw IngestError(lineno, fmt::format("expected {} fields, found {}", header.size(), cols.size()));
    InteractionEvent e;
    e.actor = std::string(cols[0]);
    e.target = std::string(cols[1]);
    e.day = parse_int(cols[2], lineno, "day");
    if (has_count) e.count = parse_int(cols[3], lineno, "count");
    check_event(e, lineno, T);
    events.push_back(std::move(e));
  }
  return events;
}

void validate_events(const std::vector<InteractionEvent>& events, std::optional<int> T) {
  for (std::size_t i = 0; i < events.size(); ++i) check_event(events[i], i + 2, T);
}

DyadLedger build_dyads(const std::vector<InteractionEvent>& events) {
  std::map<DyadKey, std::set<int>> days;
  for (const auto& e : events) days[{e.actor, e.target}].insert(e.day);
  DyadLedger out;
  for (auto& [key, set] : days) out.emplace(key, static_cast<int>(set.size()));
  return out;
}

std::vector<AgentSummary> summarize_agents(const DyadLedger& ledger,
                                           const std::vector<InteractionEvent>& events, double b) {
  if (!std::isfinite(b)) throw std::invalid_argument("summarize_agents: b must be finite");
  std::map<std::string, std::set<int>> active;
  for (const auto& e : events) active[e.actor].insert(e.day);

  std::map<std::string, std::pair<int, long long>> ties;  // N, sum d
  for (const auto& [key, d] : ledger) {
    auto& t = ties[key.first];
    ++t.first;
    t.second += d;
  }
  std::vector<AgentSummary> out;
  for (const auto& [id, t] : ties) {
    AgentSummary s;
    s.id = id;
    s.N = t.first;
    s.m = static_cast<double>(t.second) / t.first;
    const auto it = active.find(id);
    s.u = it == active.end() ? 0 : static_cast<int>(it->second.size());
    if (s.u < 1) throw std::invalid_argument(fmt::format("agent '{}' has ties but no active days", id));
    s.C = std::pow(static_cast<double>(s.u), b);
    out.push_back(std::move(s));
  }
  return out;
}

std::map<std::string, long long> total_acts(const std::vector<InteractionEvent>& events) {
  std::map<std::string, long long> out;
  for (const auto& e : events) out[e.actor] += e.count;
  return out;
}

double actual_daily_grooming(long long acts, int N, int T) {
  if (T < 1) throw std::invalid_argument("actual_daily_grooming: T must be >= 1");
  return static_cast<double>(acts - N) / T;
}

namespace {

struct DyadActivity {
  std::map<int, long long> per_day;  // day -> acts
};

std::vector<CurveRow> percentile_rows(std::map<double, std::vector<double>>& bins) {
  std::vector<CurveRow> rows;
  for (auto& [x, values] : bins) {
    if (values.size() <= kMinCurveSamples) continue;
    std::sort(values.begin(), values.end());
    rows.push_back({x, quantile_sorted(values, 0.25), quantile_sorted(values, 0.5),
                    quantile_sorted(values, 0.75), values.size()});
  }
  return rows;
}

}  // namespace

GroomingCurves grooming_curves(const std::vector<InteractionEvent>& events, int T) {
  if (T < 1) throw std::invalid_argument("grooming_curves: T must be >= 1");
  std::map<DyadKey, DyadActivity> dyads;
  for (const auto& e : events) dyads[{e.actor, e.target}].per_day[e.day] += e.count;

  GroomingCurves out;
  {
    std::map<double, std::vector<double>> bins;
    for (const auto& [key, act] : dyads) {
      long long acts = 0;
      for (const auto& [day, c] : act.per_day) acts += c;
      const auto d = static_cast<double>(act.per_day.size());
      bins[d].push_back(static_cast<double>(acts) / d);
    }
    out.by_strength = percentile_rows(bins);
  }
  for (const double frac : {1.0, 0.9, 0.8}) {
    const int horizon = std::max(1, static_cast<int>(std::lround(frac * T)));
    std::map<double, std::vector<double>> bins;
    for (const auto& [key, act] : dyads) {
      long long acts = 0;
      int d = 0;
      for (const auto& [day, c] : act.per_day) {
        if (day >= horizon) break;
        acts += c;
        ++d;
      }
      if (d == 0) continue;
      bins[static_cast<double>(d) / horizon].push_back(static_cast<double>(acts) / d);
    }
    out.by_density.push_back({horizon, percentile_rows(bins)});
  }
  return out;
}

}  // namespace groom
