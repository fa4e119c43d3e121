#include "groom/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "json.hpp"

namespace groom {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  return fmt::format("{}", x);
}

namespace {

std::string opt_number(const std::optional<double>& x) { return x ? format_number(*x) : ""; }

json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void write_json(const json& j, const fs::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Reads a CSV with the given header; returns data rows.
std::vector<std::vector<std::string>> read_csv(const fs::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(fmt::format("'{}' is empty", path.string()));
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header)
    throw std::runtime_error(
        fmt::format("'{}': expected header '{}', found '{}'", path.string(), header, line));
  std::vector<std::vector<std::string>> rows;
  const auto width = split_csv(header).size();
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto row = split_csv(line);
    if (row.size() != width)
      throw std::runtime_error(fmt::format("'{}' line {}: expected {} fields, found {}",
                                           path.string(), lineno, width, row.size()));
    rows.push_back(std::move(row));
  }
  return rows;
}

double to_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error(fmt::format("bad number '{}'", s));
  return v;
}

// ---------------------------------------------------------------------------
// SVG helpers

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;

  [[nodiscard]] double map(double v) const { return log ? std::log10(v) : v; }
  [[nodiscard]] double frac(double v) const {
    const double span = hi - lo;
    return span > 0 ? (map(v) - lo) / span : 0.5;
  }
};

Axis fit_axis(const std::vector<double>& values, bool log) {
  Axis ax;
  ax.log = log;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v) || (log && v <= 0)) continue;
    const double m = log ? std::log10(v) : v;
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  if (!std::isfinite(lo)) {
    lo = 0;
    hi = 1;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  ax.lo = lo - pad;
  ax.hi = hi + pad;
  return ax;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '-':
        // "--" is not allowed inside XML comments
        out += (!out.empty() && out.back() == '-') ? " -" : "-";
        break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) { return fmt::format("{:.2f}", v); }

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

SvgPlot& SvgPlot::log_x(bool on) {
  log_x_ = on;
  return *this;
}
SvgPlot& SvgPlot::log_y(bool on) {
  log_y_ = on;
  return *this;
}

SvgPlot& SvgPlot::points(const std::vector<double>& x, const std::vector<double>& y,
                         const std::string& colour, const std::string& label) {
  series_.push_back({Series::Kind::points, x, y, {}, colour, label});
  return *this;
}

SvgPlot& SvgPlot::line(const std::vector<double>& x, const std::vector<double>& y,
                       const std::string& colour, const std::string& label, bool dashed) {
  series_.push_back({Series::Kind::line, x, y, {}, colour, label, dashed});
  return *this;
}

SvgPlot& SvgPlot::error_bars(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& err, const std::string& colour,
                             const std::string& label) {
  series_.push_back({Series::Kind::bars, x, y, err, colour, label});
  return *this;
}

std::string SvgPlot::render() const {
  std::vector<double> xs, ys;
  for (const auto& s : series_) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      ys.push_back(s.y[i]);
      if (s.kind == Series::Kind::bars && i < s.err.size() && std::isfinite(s.err[i])) {
        ys.push_back(s.y[i] - s.err[i]);
        ys.push_back(s.y[i] + s.err[i]);
      }
    }
  }
  const Axis ax = fit_axis(xs, log_x_);
  const Axis ay = fit_axis(ys, log_y_);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto X = [&](double v) { return kLeft + ax.frac(v) * pw; };
  auto Y = [&](double v) { return kTop + (1.0 - ay.frac(v)) * ph; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!log_x_ || x > 0) && (!log_y_ || y > 0);
  };

  std::ostringstream o;
  o << fmt::format(R"svg(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)svg",
                   kWidth, kHeight, kWidth, kHeight)
    << '\n';
  for (const auto& s : series_) {
    o << "<!-- data " << escape(s.label) << ":";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      o << ' ' << format_number(s.x[i]) << ',' << format_number(s.y[i]);
      if (s.kind == Series::Kind::bars) o << ',' << format_number(s.err[i]);
    }
    o << " -->\n";
  }
  o << R"svg(<rect x="0" y="0" width="640" height="480" fill="white"/>)svg" << '\n';
  o << fmt::format(R"svg(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>)svg",
                   kLeft, kTop, pw, ph)
    << '\n';
  o << fmt::format(R"svg(<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>)svg",
                   kWidth / 2, escape(title_))
    << '\n';
  o << fmt::format(R"svg(<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>)svg",
                   kLeft + pw / 2, kHeight - 15, escape(x_label_))
    << '\n';
  o << fmt::format(R"svg(<text x="18" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>)svg",
                   kTop + ph / 2, kTop + ph / 2, escape(y_label_))
    << '\n';

  for (int i = 0; i <= 4; ++i) {
    const double fx = ax.lo + (ax.hi - ax.lo) * i / 4.0;
    const double fy = ay.lo + (ay.hi - ay.lo) * i / 4.0;
    const double vx = ax.log ? std::pow(10.0, fx) : fx;
    const double vy = ay.log ? std::pow(10.0, fy) : fy;
    const double gx = kLeft + pw * i / 4.0, gy = kTop + ph * (1.0 - i / 4.0);
    o << fmt::format(R"svg(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>)svg", px(gx),
                     px(kTop + ph), px(gx), px(kTop + ph + 5))
      << fmt::format(R"svg(<text x="{}" y="{}" font-size="11" text-anchor="middle">{:.3g}</text>)svg",
                     px(gx), px(kTop + ph + 18), vx)
      << fmt::format(R"svg(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>)svg", px(kLeft - 5),
                     px(gy), px(kLeft), px(gy))
      << fmt::format(R"svg(<text x="{}" y="{}" font-size="11" text-anchor="end">{:.3g}</text>)svg",
                     px(kLeft - 8), px(gy + 4), vy)
      << '\n';
  }

  for (const auto& s : series_) {
    switch (s.kind) {
      case Series::Kind::points:
        for (std::size_t i = 0; i < s.x.size(); ++i)
          if (usable(s.x[i], s.y[i]))
            o << fmt::format(R"svg(<circle cx="{}" cy="{}" r="2.5" fill="{}"/>)svg", px(X(s.x[i])),
                             px(Y(s.y[i])), s.colour)
              << '\n';
        break;
      case Series::Kind::line: {
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i)
          if (usable(s.x[i], s.y[i])) pts += fmt::format("{},{} ", px(X(s.x[i])), px(Y(s.y[i])));
        if (!pts.empty()) pts.pop_back();
        o << fmt::format(R"svg(<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{}/>)svg",
                         pts, s.colour, s.dashed ? R"svg( stroke-dasharray="6,4")svg" : "")
          << '\n';
        break;
      }
      case Series::Kind::bars:
        for (std::size_t i = 0; i < s.x.size(); ++i) {
          if (!usable(s.x[i], s.y[i])) continue;
          const double e = std::isfinite(s.err[i]) ? s.err[i] : 0.0;
          const double lo = s.y[i] - e, hi = s.y[i] + e;
          if (usable(s.x[i], lo) && usable(s.x[i], hi))
            o << fmt::format(R"svg(<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="{3}"/>)svg",
                             px(X(s.x[i])), px(Y(lo)), px(Y(hi)), s.colour);
          o << fmt::format(R"svg(<circle cx="{}" cy="{}" r="3" fill="{}"/>)svg", px(X(s.x[i])),
                           px(Y(s.y[i])), s.colour)
            << '\n';
        }
        break;
    }
  }

  double ly = kTop + 14;
  for (const auto& s : series_) {
    o << fmt::format(R"svg(<rect x="{}" y="{}" width="10" height="10" fill="{}"/>)svg", px(kLeft + 10),
                     px(ly - 9), s.colour)
      << fmt::format(R"svg(<text x="{}" y="{}" font-size="11">{}</text>)svg", px(kLeft + 25), px(ly),
                     escape(s.label))
      << '\n';
    ly += 15;
  }
  o << "</svg>\n";
  return o.str();
}

void SvgPlot::save(const fs::path& path) const {
  auto out = open_out(path);
  out << render();
}

std::vector<std::pair<double, double>> ccdf(std::vector<double> values) {
  std::vector<std::pair<double, double>> out;
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    out.emplace_back(values[i], static_cast<double>(values.size() - i) / n);
    i = j;
  }
  return out;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::runtime_error(fmt::format("cannot create output directory '{}'", dir.string()));
}

// ---------------------------------------------------------------------------

void write_ingest_bundle(const DyadLedger& ledger, const std::vector<AgentSummary>& agents,
                         const GroomingCurves& curves, const fs::path& dir) {
  ensure_directory(dir);
  {
    auto out = open_out(dir / "dyads.csv");
    out << "actor,target,d\n";
    for (const auto& [key, d] : ledger) out << key.first << ',' << key.second << ',' << d << '\n';
  }
  {
    auto out = open_out(dir / "agents.csv");
    out << "id,N,m,u,C\n";
    for (const auto& g : agents)
      out << g.id << ',' << g.N << ',' << format_number(g.m) << ',' << g.u << ','
          << format_number(g.C) << '\n';
  }
  {
    auto out = open_out(dir / "curves.csv");
    out << "x,p25,p50,p75,n\n";
    for (const auto& r : curves.by_strength)
      out << format_number(r.x) << ',' << format_number(r.p25) << ',' << format_number(r.p50) << ','
          << format_number(r.p75) << ',' << r.n << '\n';
  }
  {
    auto out = open_out(dir / "curves_density.csv");
    out << "horizon,x,p25,p50,p75,n\n";
    for (const auto& c : curves.by_density)
      for (const auto& r : c.rows)
        out << c.horizon << ',' << format_number(r.x) << ',' << format_number(r.p25) << ','
            << format_number(r.p50) << ',' << format_number(r.p75) << ',' << r.n << '\n';
  }
}

std::vector<AgentSummary> read_agents_csv(const fs::path& path) {
  std::vector<AgentSummary> out;
  for (const auto& row : read_csv(path, "id,N,m,u,C")) {
    AgentSummary g;
    g.id = row[0];
    g.N = std::stoi(row[1]);
    g.m = to_double(row[2]);
    g.u = std::stoi(row[3]);
    g.C = to_double(row[4]);
    out.push_back(std::move(g));
  }
  return out;
}

void write_tradeoff_json(const TradeoffFit& fit, const fs::path& path) {
  json j;
  j["n"] = fit.n;
  j["adj_r2"] = json_number(fit.adj_r2);
  j["sigma"] = json_number(fit.sigma_hat);
  j["a"] = {{"estimate", json_number(fit.a_hat)}, {"se", json_number(fit.se_a)},
            {"t", json_number(fit.t_a)},          {"p", json_number(fit.p_a)},
            {"null", 1.0},                        {"ci95", json_number(fit.ci95_a())}};
  j["b"] = {{"estimate", json_number(fit.b_hat)}, {"se", json_number(fit.se_b)},
            {"t", json_number(fit.t_b)},          {"p", json_number(fit.p_b)},
            {"null", 0.0},                        {"ci95", json_number(fit.ci95_b())}};
  write_json(j, path);
}

void write_simulation_bundle(const std::vector<GroomerSpec>& specs,
                             const std::vector<SimLedger>& ledgers, const ModelParams& params,
                             const fs::path& dir) {
  ensure_directory(dir);
  {
    auto out = open_out(dir / "groomers.csv");
    out << "id,C,N_target,m_target,budget,N,m\n";
    for (std::size_t i = 0; i < specs.size(); ++i)
      out << specs[i].id << ',' << format_number(specs[i].C) << ',' << specs[i].N_target << ','
          << format_number(specs[i].m_target) << ','
          << format_number(params.T >= 1 ? daily_budget(params, specs[i]) : 0.0) << ','
          << ledgers[i].ties() << ',' << format_number(ledgers[i].mean_strength()) << '\n';
  }
  {
    auto out = open_out(dir / "ledgers.csv");
    out << "groomer,tie,d\n";
    for (std::size_t i = 0; i < specs.size(); ++i)
      for (std::size_t j = 0; j < ledgers[i].strengths.size(); ++j)
        out << specs[i].id << ',' << j << ',' << format_number(ledgers[i].strengths[j]) << '\n';
  }
  const auto pts = ccdf(pooled_strengths(ledgers));
  {
    auto out = open_out(dir / "ccdf.csv");
    out << "d,ccdf\n";
    for (const auto& [x, p] : pts) out << format_number(x) << ',' << format_number(p) << '\n';
  }
  std::vector<double> x, y;
  for (const auto& [a, b] : pts) {
    x.push_back(a);
    y.push_back(b);
  }
  SvgPlot(fmt::format("Strength CCDF (a={}, alpha={}, T={})", format_number(params.a),
                      format_number(params.alpha), params.T),
          "d", "P(D >= d)")
      .log_x()
      .log_y()
      .points(x, y, "#d95f02", "simulation")
      .save(dir / "ccdf.svg");
}

void write_exp1_bundle(const Exp1Result& r, const fs::path& dir) {
  ensure_directory(dir);
  json j;
  j["a"] = r.a;
  j["b"] = r.b;
  j["T"] = r.T;
  j["C75"] = json_number(r.C75);
  j["alpha"] = json_number(r.alpha.alpha);
  j["error"] = json_number(r.alpha.error);
  j["flat_objective"] = r.alpha.flat;
  j["agents"] = r.rows.size();
  if (r.correlation) {
    j["budget_correlation"] = {{"r", json_number(r.correlation->r)},
                               {"p", json_number(r.correlation->p)},
                               {"n", r.correlation->n}};
  } else {
    j["budget_correlation"] = nullptr;
    if (r.correlation_note) j["budget_correlation_note"] = *r.correlation_note;
  }
  write_json(j, dir / "exp1.json");

  {
    auto out = open_out(dir / "alpha_search.csv");
    out << "alpha,e\n";
    for (const auto& [a, e] : r.alpha.evaluated) out << format_number(a) << ',' << format_number(e) << '\n';
  }
  {
    auto out = open_out(dir / "exp1_agents.csv");
    out << "id,C,N,m,N_sim,m_sim,G_pred,G_actual\n";
    for (const auto& row : r.rows)
      out << row.id << ',' << format_number(row.C) << ',' << row.N << ',' << format_number(row.m)
          << ',' << format_number(row.N_sim) << ',' << format_number(row.m_sim) << ','
          << format_number(row.G_pred) << ',' << opt_number(row.G_actual) << '\n';
  }
  const auto data_ccdf = ccdf(r.data_strengths);
  const auto sim_ccdf = ccdf(r.sim_strengths);
  {
    auto out = open_out(dir / "ccdf.csv");
    out << "source,d,ccdf\n";
    for (const auto& [x, p] : data_ccdf) out << "data," << format_number(x) << ',' << format_number(p) << '\n';
    for (const auto& [x, p] : sim_ccdf) out << "sim," << format_number(x) << ',' << format_number(p) << '\n';
  }

  // log N / log C against log m / log C, with the C = N m^a line.
  std::vector<double> dx, dy, sx, sy;
  for (const auto& row : r.rows) {
    const double lc = std::log(row.C);
    if (!(lc > 0.0)) continue;
    dx.push_back(std::log(row.m) / lc);
    dy.push_back(std::log(row.N) / lc);
    if (row.m_sim > 0 && row.N_sim > 0) {
      sx.push_back(std::log(row.m_sim) / lc);
      sy.push_back(std::log(row.N_sim) / lc);
    }
  }
  const double top = 1.0 / r.a;
  SvgPlot("Trade-off scatter", "log m / log C", "log N / log C")
      .points(dx, dy, "#000000", "data")
      .points(sx, sy, "#d95f02", "simulation")
      .line({0.0, top}, {1.0, 0.0}, "#1b9e77", fmt::format("C = N m^{}", format_number(r.a)), true)
      .save(dir / "scatter.svg");

  auto unzip = [](const std::vector<std::pair<double, double>>& v) {
    std::pair<std::vector<double>, std::vector<double>> out;
    for (const auto& [a, b] : v) {
      out.first.push_back(a);
      out.second.push_back(b);
    }
    return out;
  };
  const auto [ddx, ddy] = unzip(data_ccdf);
  const auto [ssx, ssy] = unzip(sim_ccdf);
  SvgPlot("Strength CCDF", "d", "P(D >= d)")
      .log_x()
      .log_y()
      .points(ddx, ddy, "#000000", "data")
      .points(ssx, ssy, "#d95f02", "simulation")
      .save(dir / "ccdf.svg");
}

// ---------------------------------------------------------------------------

namespace {

const char* selection_name(Selection s) {
  return s == Selection::per_result ? "per_result" : "per_alpha_mean";
}

Selection selection_from(const std::string& s) {
  if (s == "per_result") return Selection::per_result;
  if (s == "per_alpha_mean") return Selection::per_alpha_mean;
  throw std::runtime_error(fmt::format("unknown selection mode '{}'", s));
}

json axis_json(const GridAxis& g) { return {{"lo", g.lo}, {"hi", g.hi}, {"step", g.step}}; }
GridAxis axis_from(const json& j) {
  return {j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("step").get<double>()};
}

json fit_block(const LinearFit& f, std::size_t i) {
  return {{"estimate", json_number(f.beta[i])},
          {"se", json_number(f.se[i])},
          {"t", json_number(f.t[i])},
          {"p", json_number(f.p[i])}};
}

}  // namespace

void write_sweep_bundle(const SweepResult& r, const fs::path& dir) {
  ensure_directory(dir);
  const auto& c = r.config;
  {
    json j;
    j["a"] = axis_json(c.a_axis);
    j["alpha"] = axis_json(c.alpha_axis);
    j["reps"] = c.reps;
    j["T"] = c.T;
    j["C"] = json_number(r.C);
    j["M"] = c.M;
    j["select"] = c.select;
    j["selection"] = selection_name(c.selection);
    j["threshold"] = c.threshold;
    j["K"] = c.K;
    j["seed"] = c.seed;
    j["population"] = c.population.size();
    write_json(j, dir / "sweep_config.json");
  }
  {
    auto out = open_out(dir / "population.csv");
    out << "id,C,N\n";
    for (const auto& p : c.population) out << p.id << ',' << format_number(p.C) << ',' << p.N << '\n';
  }
  {
    auto out = open_out(dir / "sweep.csv");
    out << "a,alpha,rep,seed,e,phi\n";
    for (const auto& cell : r.cells)
      out << format_number(cell.a) << ',' << format_number(cell.alpha) << ',' << cell.rep << ','
          << cell.seed << ',' << format_number(cell.e) << ',' << opt_number(cell.phi) << '\n';
  }
  {
    auto out = open_out(dir / "selected.csv");
    out << "a,alpha,reps,e_mean,phi";
    for (int k = 1; k <= c.K; ++k) out << ",H" << k;
    out << '\n';
    for (const auto& s : r.selected) {
      std::string reps;
      for (std::size_t i = 0; i < s.reps.size(); ++i) reps += (i ? ";" : "") + std::to_string(s.reps[i]);
      out << format_number(s.a) << ',' << format_number(s.alpha) << ',' << reps << ','
          << format_number(s.e_mean) << ',' << format_number(s.phi);
      for (auto h : s.H) out << ',' << h;
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "summary.csv");
    out << "a,alpha_mean,alpha_sd,phi_mean,phi_sd\n";
    for (const auto& s : r.summary)
      out << format_number(s.a) << ',' << format_number(s.alpha_mean) << ','
          << format_number(s.alpha_sd) << ',' << format_number(s.phi_mean) << ','
          << format_number(s.phi_sd) << '\n';
  }
  {
    auto out = open_out(dir / "ratios.csv");
    out << "a,k,ratio\n";
    for (const auto& s : r.selected)
      for (std::size_t k = 0; k < s.ratios.size(); ++k)
        out << format_number(s.a) << ',' << k + 1 << ',' << opt_number(s.ratios[k]) << '\n';
  }
  {
    auto out = open_out(dir / "ratio_fits.csv");
    out << "k,slope,intercept,se,p,n\n";
    for (const auto& f : r.ratio_fits)
      out << f.k << ',' << format_number(f.slope) << ',' << format_number(f.intercept) << ','
          << format_number(f.se) << ',' << format_number(f.p) << ',' << f.n << '\n';
  }
  {
    json j;
    j["threshold"] = c.threshold;
    if (r.threshold) {
      const auto& t = *r.threshold;
      j["n"] = t.n;
      j["beta1"] = fit_block(t.threshold_model, 0);
      j["beta2"] = fit_block(t.threshold_model, 1);
      j["beta3"] = fit_block(t.threshold_model, 2);
      j["beta0"] = fit_block(t.threshold_model, 3);
      j["sigma"] = json_number(t.sigma);
      j["adj_r2"] = json_number(t.threshold_model.adj_r2);
      j["aic_threshold"] = json_number(t.aic_threshold);
      j["linear"] = {{"slope", fit_block(t.linear_model, 0)},
                     {"intercept", fit_block(t.linear_model, 1)},
                     {"sigma", json_number(t.linear_model.sigma)}};
      j["aic_linear"] = json_number(t.aic_linear);
      j["threshold_preferred"] = t.threshold_preferred();
    } else {
      j["error"] = r.threshold_error.value_or("no selected cells");
    }
    write_json(j, dir / "threshold_fit.json");
  }

  // Plots
  std::vector<double> as, phi_m, phi_s, al_m, al_s;
  for (const auto& s : r.summary) {
    as.push_back(s.a);
    phi_m.push_back(s.phi_mean);
    phi_s.push_back(s.phi_sd);
    al_m.push_back(s.alpha_mean);
    al_s.push_back(s.alpha_sd);
  }
  SvgPlot phi_plot("Power-law coefficient by a", "a", "phi");
  phi_plot.error_bars(as, phi_m, phi_s, "#000000", "mean phi +/- sd");
  if (r.threshold) {
    const auto& t = *r.threshold;
    std::vector<double> lx, ly, ux, uy;
    for (double a : as) {
      if (a < t.threshold) {
        lx.push_back(a);
        ly.push_back(t.beta2 * a + t.beta0);
      } else {
        ux.push_back(a);
        uy.push_back(t.beta1 * a + t.beta3 + t.beta0);
      }
    }
    phi_plot.line(lx, ly, "#1b9e77", "a < threshold").line(ux, uy, "#d95f02", "a >= threshold");
  }
  phi_plot.save(dir / "phi_vs_a.svg");
  SvgPlot("Selected alpha by a", "a", "alpha")
      .error_bars(as, al_m, al_s, "#000000", "mean alpha +/- sd")
      .save(dir / "alpha_vs_a.svg");

  SvgPlot ratio_plot("Neighbouring hierarchy ratios", "a", "H_k / H_k+1");
  const char* colours[] = {"#d95f02", "#1b9e77", "#7570b3", "#e7298a"};
  int ci = 0;
  for (int k : {1, 2, 3, 10}) {
    if (k >= c.K) continue;
    std::map<double, std::vector<double>> by_a;
    for (const auto& s : r.selected)
      if (s.ratios[k - 1]) by_a[s.a].push_back(*s.ratios[k - 1]);
    std::vector<double> x, y;
    for (const auto& [a, v] : by_a) {
      x.push_back(a);
      double sum = 0;
      for (double q : v) sum += q;
      y.push_back(sum / static_cast<double>(v.size()));
    }
    ratio_plot.line(x, y, colours[ci++ % 4], fmt::format("k = {}", k));
  }
  ratio_plot.save(dir / "ratios.svg");
}

SweepResult load_sweep_bundle(const fs::path& dir) {
  std::ifstream cfg_in(dir / "sweep_config.json");
  if (!cfg_in) throw std::runtime_error(fmt::format("cannot read '{}'", (dir / "sweep_config.json").string()));
  const auto cfg = json::parse(cfg_in);
  SweepResult r;
  auto& c = r.config;
  c.a_axis = axis_from(cfg.at("a"));
  c.alpha_axis = axis_from(cfg.at("alpha"));
  c.reps = cfg.at("reps").get<int>();
  c.T = cfg.at("T").get<int>();
  r.C = cfg.at("C").get<double>();
  c.C = r.C;
  c.M = cfg.at("M").get<int>();
  c.select = cfg.at("select").get<int>();
  c.selection = selection_from(cfg.at("selection").get<std::string>());
  c.threshold = cfg.at("threshold").get<double>();
  c.K = cfg.at("K").get<int>();
  c.seed = cfg.at("seed").get<std::uint64_t>();

  for (const auto& row : read_csv(dir / "population.csv", "id,C,N"))
    c.population.push_back({row[0], to_double(row[1]), std::stoi(row[2])});

  const auto as = c.a_axis.values();
  const auto alphas = c.alpha_axis.values();
  auto index_of = [](const std::vector<double>& grid, double v) {
    const auto it = std::min_element(grid.begin(), grid.end(), [v](double x, double y) {
      return std::fabs(x - v) < std::fabs(y - v);
    });
    return static_cast<std::size_t>(it - grid.begin());
  };
  for (const auto& row : read_csv(dir / "sweep.csv", "a,alpha,rep,seed,e,phi")) {
    SweepCell cell;
    cell.a = to_double(row[0]);
    cell.alpha = to_double(row[1]);
    cell.ia = index_of(as, cell.a);
    cell.ialpha = index_of(alphas, cell.alpha);
    cell.rep = std::stoi(row[2]);
    cell.seed = std::stoull(row[3]);
    cell.e = to_double(row[4]);
    if (!row[5].empty()) cell.phi = to_double(row[5]);
    r.cells.push_back(std::move(cell));
  }

  std::string header = "a,alpha,reps,e_mean,phi";
  for (int k = 1; k <= c.K; ++k) header += ",H" + std::to_string(k);
  for (const auto& row : read_csv(dir / "selected.csv", header)) {
    SelectedCell s;
    s.a = to_double(row[0]);
    s.alpha = to_double(row[1]);
    std::stringstream reps(row[2]);
    std::string rep;
    while (std::getline(reps, rep, ';')) s.reps.push_back(std::stoi(rep));
    s.e_mean = to_double(row[3]);
    s.phi = to_double(row[4]);
    for (int k = 0; k < c.K; ++k) s.H.push_back(std::stoll(row[5 + k]));
    s.ratios = hierarchy_ratios(HierarchyProfile{s.H, HierarchyMode::sim});
    r.selected.push_back(std::move(s));
  }
  analyse_selection(r);
  return r;
}

}  // namespace groom
