#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "groom/experiments.hpp"
#include "groom/ingest.hpp"
#include "groom/statfit.hpp"

namespace groom {

/// Output files are written with fixed number formatting so that equal
/// inputs give byte-identical bundles.
std::string format_number(double x);

/// Minimal static SVG chart: fixed 640x480 canvas, linear or log10 axes.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  SvgPlot& log_x(bool on = true);
  SvgPlot& log_y(bool on = true);
  SvgPlot& points(const std::vector<double>& x, const std::vector<double>& y,
                  const std::string& colour, const std::string& label);
  SvgPlot& line(const std::vector<double>& x, const std::vector<double>& y,
                const std::string& colour, const std::string& label, bool dashed = false);
  SvgPlot& error_bars(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>& err, const std::string& colour,
                      const std::string& label);

  [[nodiscard]] std::string render() const;
  void save(const std::filesystem::path& path) const;

 private:
  struct Series {
    enum class Kind { points, line, bars } kind;
    std::vector<double> x, y, err;
    std::string colour, label;
    bool dashed = false;
  };
  std::string title_, x_label_, y_label_;
  bool log_x_ = false, log_y_ = false;
  std::vector<Series> series_;
};

/// Complementary CDF points (x, P[X >= x]) at each distinct value.
std::vector<std::pair<double, double>> ccdf(std::vector<double> values);

void ensure_directory(const std::filesystem::path& dir);

/// dyads.csv, agents.csv, curves.csv, curves_density.csv.
void write_ingest_bundle(const DyadLedger& ledger, const std::vector<AgentSummary>& agents,
                         const GroomingCurves& curves, const std::filesystem::path& dir);

/// Reads agents.csv (`id,N,m,u,C`).
std::vector<AgentSummary> read_agents_csv(const std::filesystem::path& path);

void write_tradeoff_json(const TradeoffFit& fit, const std::filesystem::path& path);

/// groomers.csv, ledgers.csv, ccdf.csv, ccdf.svg.
void write_simulation_bundle(const std::vector<GroomerSpec>& specs,
                             const std::vector<SimLedger>& ledgers, const ModelParams& params,
                             const std::filesystem::path& dir);

/// exp1.json, exp1_agents.csv, alpha_search.csv, ccdf.csv, scatter.svg, ccdf.svg.
void write_exp1_bundle(const Exp1Result& result, const std::filesystem::path& dir);

/// sweep.csv, summary.csv, ratios.csv, ratio_fits.csv, threshold_fit.json,
/// sweep_config.json and the phi / alpha / ratio plots.
void write_sweep_bundle(const SweepResult& result, const std::filesystem::path& dir);

/// Rebuilds a SweepResult (without realized pairs) from a bundle written
/// by write_sweep_bundle, re-running the selection analysis.
SweepResult load_sweep_bundle(const std::filesystem::path& dir);

}  // namespace groom
