#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "c1h/adaptivity.hpp"

namespace c1h {

struct ConvergenceTable {
  std::vector<Index> ndof;
  std::vector<double> error;
  std::vector<double> estimator;

  bool operator==(const ConvergenceTable&) const = default;
};

ConvergenceTable make_table(const std::vector<AdaptiveRecord>& records);

// Header `ndof,error,estimator`, 17 significant digits, LF endings.
std::string to_csv(const ConvergenceTable& t);
ConvergenceTable parse_csv(const std::string& text);

// Per-step rates -log(e_{i+1}/e_i) / log(n_{i+1}/n_i); NaN where undefined.
std::vector<double> eoc(const std::vector<Index>& ndof, const std::vector<double>& e);
// Least-squares slope of -log e against log ndof over the records with
// ndof >= ndof_final / 4 (at least the last three). NaN if undefined.
double asymptotic_eoc(const std::vector<Index>& ndof, const std::vector<double>& e);

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  bool dashed = false;
};

// Log-log plot with one polyline per series and slope triangles 1.5 and 2.
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title);
void emit_plot(const std::vector<PlotSeries>& series, const std::string& path,
               const std::string& title);

// exN_pP_{C1|C0}, plus _glob for uniform and _corner for corner runs of Ex. 1.
std::string output_stem(const LoopConfig& cfg);

struct RunResult {
  std::vector<AdaptiveRecord> records;
  ConvergenceTable table;
  double eoc_error = 0, eoc_estimator = 0;
  std::string csv_path, svg_path, eoc_path;
};

// Runs the loop and writes the CSV, SVG plot and EOC summary into out_dir.
RunResult run_example(const LoopConfig& cfg, const std::string& out_dir,
                      std::ostream* log = nullptr);

}  // namespace c1h
