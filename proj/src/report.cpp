#include "c1h/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "c1h/errors.hpp"

namespace c1h {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path);
  f << text;
  if (!f) throw ValidationError("write failed: " + path);
}
}  // namespace

ConvergenceTable make_table(const std::vector<AdaptiveRecord>& records) {
  ConvergenceTable t;
  for (const auto& r : records) {
    t.ndof.push_back(r.ndof);
    t.error.push_back(r.error);
    t.estimator.push_back(r.estimator);
  }
  return t;
}

std::string to_csv(const ConvergenceTable& t) {
  std::string s = "ndof,error,estimator\n";
  for (std::size_t i = 0; i < t.ndof.size(); ++i) {
    s += std::to_string(t.ndof[i]) + "," + fmt17(t.error[i]) + "," + fmt17(t.estimator[i]) + "\n";
  }
  return s;
}

ConvergenceTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "ndof,error,estimator") {
    throw ValidationError("csv: bad header");
  }
  ConvergenceTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c)) {
      throw ValidationError("csv: malformed row '" + line + "'");
    }
    try {
      t.ndof.push_back(std::stoll(a));
      t.error.push_back(std::stod(b));
      t.estimator.push_back(std::stod(c));
    } catch (const std::exception&) {
      throw ValidationError("csv: malformed number in '" + line + "'");
    }
  }
  return t;
}

std::vector<double> eoc(const std::vector<Index>& ndof, const std::vector<double>& e) {
  if (ndof.size() != e.size()) throw ValidationError("eoc: length mismatch");
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < e.size(); ++i) {
    const bool ok = e[i] > 0 && e[i + 1] > 0 && ndof[i] > 0 && ndof[i + 1] != ndof[i];
    out.push_back(ok ? -std::log(e[i + 1] / e[i]) / std::log(double(ndof[i + 1]) / ndof[i])
                     : kNaN);
  }
  return out;
}

double asymptotic_eoc(const std::vector<Index>& ndof, const std::vector<double>& e) {
  if (ndof.size() != e.size()) throw ValidationError("eoc: length mismatch");
  const std::size_t n = ndof.size();
  if (n < 2) return kNaN;
  std::size_t first = n;
  while (first > 0 && 4 * ndof[first - 1] >= ndof.back()) --first;
  first = std::min(first, n >= 3 ? n - 3 : 0);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = first; i < n; ++i) {
    if (!(e[i] > 0) || ndof[i] <= 0) return kNaN;
    const double x = std::log(double(ndof[i])), y = -std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  const double den = m * sxx - sx * sx;
  if (den <= 0) return kNaN;
  return (m * sxy - sx * sy) / den;
}

static std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  bool any = false;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw ValidationError("plot: series length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0) || !(s.y[i] > 0)) continue;
      any = true;
      x0 = std::min(x0, std::log10(s.x[i]));
      x1 = std::max(x1, std::log10(s.x[i]));
      y0 = std::min(y0, std::log10(s.y[i]));
      y1 = std::max(y1, std::log10(s.y[i]));
    }
  }
  if (!any) throw ValidationError("plot: no positive data");
  x0 = std::floor(x0);
  x1 = std::max(std::ceil(x1), x0 + 1);
  y0 = std::floor(y0);
  y1 = std::max(std::ceil(y1), y0 + 1);

  const double W = 640, Hh = 480, L = 70, R = 200, T = 40, B = 50;
  const double pw = W - L - R, ph = Hh - T - B;
  auto X = [&](double lx) { return L + (lx - x0) / (x1 - x0) * pw; };
  auto Y = [&](double ly) { return T + (y1 - ly) / (y1 - y0) * ph; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  std::ostringstream o;
  o.precision(6);
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hh
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << L + pw / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">"
    << xml_escape(title) << "</text>\n";
  for (int k = int(x0); k <= int(x1); ++k) {
    o << "<line x1=\"" << X(k) << "\" y1=\"" << T << "\" x2=\"" << X(k) << "\" y2=\"" << T + ph
      << "\" stroke=\"#ddd\"/>\n<text x=\"" << X(k) << "\" y=\"" << T + ph + 15
      << "\" text-anchor=\"middle\">1e" << k << "</text>\n";
  }
  for (int k = int(y0); k <= int(y1); ++k) {
    o << "<line x1=\"" << L << "\" y1=\"" << Y(k) << "\" x2=\"" << L + pw << "\" y2=\"" << Y(k)
      << "\" stroke=\"#ddd\"/>\n<text x=\"" << L - 5 << "\" y=\"" << Y(k) + 4
      << "\" text-anchor=\"end\">1e" << k << "</text>\n";
  }
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n"
    << "<text x=\"" << L + pw / 2 << "\" y=\"" << Hh - 10 << "\" text-anchor=\"middle\">NDOF</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colors[k % 8];
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\"";
    if (s.dashed) o << " stroke-dasharray=\"5,3\"";
    o << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (s.x[i] > 0 && s.y[i] > 0) o << X(std::log10(s.x[i])) << "," << Y(std::log10(s.y[i])) << " ";
    }
    o << "\"/>\n";
    const double ly = T + 15 + 16 * double(k);
    o << "<line x1=\"" << L + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << L + pw + 35
      << "\" y2=\"" << ly << "\" stroke=\"" << c << "\" stroke-width=\"1.5\""
      << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n<text x=\"" << L + pw + 40
      << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.label) << "</text>\n";
  }
  // Reference triangles: error ~ NDOF^-slope.
  const double slopes[] = {1.5, 2.0};
  for (int k = 0; k < 2; ++k) {
    const double ax = x0 + (0.55 + 0.2 * k) * (x1 - x0), bx = ax + 0.15 * (x1 - x0);
    const double ay = y0 + 0.1 * (y1 - y0) + 0.15 * slopes[k] * (x1 - x0);
    const double by = ay - slopes[k] * (bx - ax);
    o << "<polygon fill=\"none\" stroke=\"black\" points=\"" << X(ax) << "," << Y(ay) << " "
      << X(bx) << "," << Y(by) << " " << X(bx) << "," << Y(ay) << "\"/>\n<text x=\""
      << X(bx) + 4 << "\" y=\"" << (Y(ay) + Y(by)) / 2 << "\">" << slopes[k] << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void emit_plot(const std::vector<PlotSeries>& series, const std::string& path,
               const std::string& title) {
  if (series.empty()) throw ValidationError("plot: no series");
  bool empty = true;
  for (const auto& s : series) empty = empty && s.x.empty();
  if (empty) throw ValidationError("plot: empty table");
  write_file(path, render_svg(series, title));
}

std::string output_stem(const LoopConfig& cfg) {
  std::string s = "ex" + std::to_string(cfg.problem.example) + "_p" + std::to_string(cfg.degree) +
                  (cfg.smoothness == Smoothness::C1 ? "_C1" : "_C0");
  if (cfg.mode == RefineMode::Uniform) s += "_glob";
  if (cfg.mode == RefineMode::Corner && cfg.problem.example != 4) s += "_corner";
  return s;
}

RunResult run_example(const LoopConfig& cfg, const std::string& out_dir, std::ostream* log) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + out_dir);
  RunResult res;
  res.records = adaptive_loop(cfg, [&](const AdaptiveRecord& r) {
    if (log) {
      *log << "iter " << r.iteration << "  ndof " << r.ndof << "  error " << fmt17(r.error)
           << "  estimator " << fmt17(r.estimator) << "  marked " << r.marked << "  "
           << r.seconds << " s\n";
      log->flush();
    }
  });
  res.table = make_table(res.records);
  const std::string stem = (std::filesystem::path(out_dir) / output_stem(cfg)).string();
  res.csv_path = stem + ".csv";
  res.svg_path = stem + ".svg";
  res.eoc_path = stem + "_eoc.txt";
  write_file(res.csv_path, to_csv(res.table));

  const auto& t = res.table;
  std::vector<double> x(t.ndof.begin(), t.ndof.end());
  std::vector<PlotSeries> series{{"error", x, t.error, false}};
  const bool has_est = std::none_of(t.estimator.begin(), t.estimator.end(),
                                    [](double v) { return std::isnan(v); });
  if (has_est) series.push_back({"estimator", x, t.estimator, true});
  emit_plot(series, res.svg_path, output_stem(cfg));

  res.eoc_error = asymptotic_eoc(t.ndof, t.error);
  res.eoc_estimator = has_est ? asymptotic_eoc(t.ndof, t.estimator) : kNaN;
  std::ostringstream s;
  s << "# per-step EOC (error, estimator)\n";
  const auto re = eoc(t.ndof, t.error);
  const auto rs = eoc(t.ndof, t.estimator);
  for (std::size_t i = 0; i < re.size(); ++i) {
    s << t.ndof[i] << " -> " << t.ndof[i + 1] << "  " << fmt17(re[i]) << "  " << fmt17(rs[i])
      << "\n";
  }
  s << "asymptotic EOC error " << fmt17(res.eoc_error) << "\n"
    << "asymptotic EOC estimator " << fmt17(res.eoc_estimator) << "\n";
  write_file(res.eoc_path, s.str());
  if (log) *log << s.str();
  return res;
}

}  // namespace c1h
