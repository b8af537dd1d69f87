#pragma once

// Sweep persistence and plot data: CSV, JSON (reloadable), an SVG heatmap
// of log10(100 xi) with iso-xi contours, and an SVG scatter of log10 chi2.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "itrap/config.hpp"
#include "itrap/errors.hpp"
#include "itrap/sweep.hpp"

namespace itrap {

namespace detail {

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double num_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

inline SolverTag solver_from_string(const std::string& s) {
  if (s == "BVLS") return SolverTag::BVLS;
  if (s == "TRF") return SolverTag::TRF;
  throw ConfigError("unknown solver tag '" + s + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string grid_csv(const SweepGrid& g) {
  std::ostringstream os;
  os << "axis1,axis2,chi2,cond,xi,apd,solver,runtime\n";
  auto cell = [](double v) { return std::isfinite(v) ? detail::fmt_num(v) : std::string(); };
  for (const auto& r : g.records) {
    os << detail::fmt_num(r.axis1) << ',' << detail::fmt_num(r.axis2) << ',' << cell(r.chi2) << ','
       << cell(r.condition_number) << ',' << (r.xi ? cell(*r.xi) : "") << ',' << (r.apd ? cell(*r.apd) : "")
       << ',' << (r.failed ? "" : to_string(r.solver)) << ',' << detail::fmt_num(r.runtime) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline json to_json(const Axis& a) { return {{"param", to_string(a.param)}, {"values", a.values}}; }

inline Axis axis_from_json(const json& j) {
  if (!j.is_object() || !j.contains("param")) throw ConfigError("sweep axis needs a 'param'");
  Axis a;
  a.param = param_from_string(j.at("param").get<std::string>());
  if (j.contains("values")) {
    a.values = j.at("values").get<std::vector<double>>();
  } else if (j.contains("from") && j.contains("to") && j.contains("count")) {
    a.values = linspace(j.at("from").get<double>(), j.at("to").get<double>(), j.at("count").get<int>());
  } else {
    throw ConfigError("sweep axis needs 'values' or 'from'/'to'/'count'");
  }
  if (a.values.empty()) throw ConfigError("sweep axis is empty");
  return a;
}

inline json to_json(const SweepRecord& r) {
  return {
      {"i1", r.i1},
      {"i2", r.i2},
      {"axis1", r.axis1},
      {"axis2", r.axis2},
      {"chi2", detail::num_or_null(r.chi2)},
      {"log10_chi2", detail::num_or_null(r.log10_chi2)},
      {"cond", detail::num_or_null(r.condition_number)},
      {"solver", to_string(r.solver)},
      {"converged", r.converged},
      {"voltages", r.voltages},
      {"xi", r.xi ? detail::num_or_null(*r.xi) : json(nullptr)},
      {"apd", r.apd ? detail::num_or_null(*r.apd) : json(nullptr)},
      {"runtime", r.runtime},
      {"failed", r.failed},
      {"error", r.error},
  };
}

inline SweepRecord record_from_json(const json& j) {
  SweepRecord r;
  r.i1 = j.at("i1").get<std::size_t>();
  r.i2 = j.at("i2").get<std::size_t>();
  r.axis1 = j.at("axis1").get<double>();
  r.axis2 = j.at("axis2").get<double>();
  r.chi2 = detail::num_from(j.at("chi2"));
  r.log10_chi2 = detail::num_from(j.at("log10_chi2"));
  r.condition_number = detail::num_from(j.at("cond"));
  r.solver = detail::solver_from_string(j.at("solver").get<std::string>());
  r.converged = j.at("converged").get<bool>();
  r.voltages = j.at("voltages").get<std::vector<double>>();
  if (!j.at("xi").is_null()) r.xi = j.at("xi").get<double>();
  if (!j.at("apd").is_null()) r.apd = j.at("apd").get<double>();
  r.runtime = j.at("runtime").get<double>();
  r.failed = j.at("failed").get<bool>();
  r.error = j.at("error").get<std::string>();
  return r;
}

inline json to_json(const SweepGrid& g) {
  json recs = json::array();
  for (const auto& r : g.records) recs.push_back(to_json(r));
  return {{"axis1", to_json(g.axis1)}, {"axis2", to_json(g.axis2)}, {"records", recs}};
}

inline SweepGrid grid_from_json(const json& j) {
  try {
    SweepGrid g;
    g.axis1 = axis_from_json(j.at("axis1"));
    g.axis2 = axis_from_json(j.at("axis2"));
    for (const auto& r : j.at("records")) g.records.push_back(record_from_json(r));
    if (g.records.size() != g.size1() * g.size2()) throw ConfigError("sweep grid: record count mismatch");
    return g;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed sweep grid: ") + e.what());
  }
}

/// Sweep description: {"axis1": {...}, "axis2": {...}, "evaluate_md",
/// "evaluate_apd", "exclude_per_side", "xi_exclude", "settle_s"}. Axis
/// values are in SI units. The base configuration is supplied separately.
inline SweepSpec sweep_from_json(const json& j, const Config& base) {
  try {
    SweepSpec s;
    s.base = base;
    s.axis1 = axis_from_json(j.at("axis1"));
    s.axis2 = axis_from_json(j.at("axis2"));
    s.evaluate_md = j.value("evaluate_md", false);
    s.evaluate_apd = j.value("evaluate_apd", false);
    s.exclude_per_side = j.value("exclude_per_side", base.solver.exclude_per_side);
    s.xi_exclude = j.value("xi_exclude", 0);
    s.settle = j.value("settle_s", base.sim.settle);
    for (const auto& [k, v] : j.items()) {
      static const std::array<const char*, 7> known{"axis1",      "axis2",      "evaluate_md", "evaluate_apd",
                                                    "exclude_per_side", "xi_exclude", "settle_s"};
      if (std::find_if(known.begin(), known.end(), [&](const char* q) { return k == q; }) == known.end())
        throw ConfigError("sweep: unknown key '" + k + "'");
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed sweep description: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace detail {

/// Five-stop approximation of the viridis palette, t in [0, 1].
inline std::string palette(double t) {
  static const double stops[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int k = std::min(3, static_cast<int>(t));
  const double f = t - k;
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(stops[k][0] + f * (stops[k + 1][0] - stops[k][0])),
                static_cast<int>(stops[k][1] + f * (stops[k + 1][1] - stops[k][1])),
                static_cast<int>(stops[k][2] + f * (stops[k + 1][2] - stops[k][2])));
  return buf;
}

struct Segment {
  double x0, y0, x1, y1;  // grid-index coordinates
};

/// Marching squares on a node grid v[i][j] (i along axis 1). Missing values
/// (NaN) suppress the affected squares.
inline std::vector<Segment> iso_segments(const std::vector<std::vector<double>>& v, double level) {
  std::vector<Segment> out;
  if (v.size() < 2 || v[0].size() < 2) return out;
  auto lerp = [&](double a, double b) { return (level - a) / (b - a); };
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    for (std::size_t j = 0; j + 1 < v[i].size(); ++j) {
      const double a = v[i][j], b = v[i + 1][j], c = v[i + 1][j + 1], d = v[i][j + 1];
      if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(d)) continue;
      // Edge crossings, walking the square a -> b -> c -> d.
      std::vector<std::pair<double, double>> pts;
      const double x = static_cast<double>(i), y = static_cast<double>(j);
      if ((a < level) != (b < level)) pts.push_back({x + lerp(a, b), y});
      if ((b < level) != (c < level)) pts.push_back({x + 1, y + lerp(b, c)});
      if ((c < level) != (d < level)) pts.push_back({x + 1 - lerp(c, d), y + 1});
      if ((d < level) != (a < level)) pts.push_back({x, y + 1 - lerp(d, a)});
      if (pts.size() == 2) {
        out.push_back({pts[0].first, pts[0].second, pts[1].first, pts[1].second});
      } else if (pts.size() == 4) {
        // Saddle: pair crossings according to the centre value.
        const double centre = 0.25 * (a + b + c + d);
        if ((centre < level) == (a < level)) {
          out.push_back({pts[0].first, pts[0].second, pts[1].first, pts[1].second});
          out.push_back({pts[2].first, pts[2].second, pts[3].first, pts[3].second});
        } else {
          out.push_back({pts[0].first, pts[0].second, pts[3].first, pts[3].second});
          out.push_back({pts[1].first, pts[1].second, pts[2].first, pts[2].second});
        }
      }
    }
  }
  return out;
}

struct Frame {
  double left = 70, top = 20, width = 480, height = 360;
};

inline std::string svg_header(const Frame& f, const std::string& title) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.left + f.width + 120 << "\" height=\""
     << f.top + f.height + 60 << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<title>" << title << "</title>\n";
  return os.str();
}

inline std::string axis_labels(const Frame& f, const SweepGrid& g) {
  std::ostringstream os;
  os << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << f.width << "\" height=\"" << f.height
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << f.left + f.width / 2 << "\" y=\"" << f.top + f.height + 40 << "\" text-anchor=\"middle\">"
     << to_string(g.axis1.param) << "</text>\n";
  os << "<text x=\"15\" y=\"" << f.top + f.height / 2 << "\" transform=\"rotate(-90 15 " << f.top + f.height / 2
     << ")\" text-anchor=\"middle\">" << to_string(g.axis2.param) << "</text>\n";
  auto tick = [&](double x, double y, double v, const char* anchor) {
    os << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\"" << anchor << "\">" << fmt_num(v).substr(0, 8)
       << "</text>\n";
  };
  tick(f.left, f.top + f.height + 16, g.axis1.values.front(), "start");
  tick(f.left + f.width, f.top + f.height + 16, g.axis1.values.back(), "end");
  tick(f.left - 4, f.top + f.height, g.axis2.values.front(), "end");
  tick(f.left - 4, f.top + 12, g.axis2.values.back(), "end");
  return os.str();
}

inline std::string colorbar(const Frame& f, double lo, double hi, const std::string& label) {
  std::ostringstream os;
  const double x = f.left + f.width + 20;
  for (int k = 0; k < 50; ++k) {
    const double t = 1.0 - (k + 0.5) / 50.0;
    os << "<rect x=\"" << x << "\" y=\"" << f.top + f.height * k / 50.0 << "\" width=\"16\" height=\""
       << f.height / 50.0 + 0.5 << "\" fill=\"" << palette(t) << "\"/>\n";
  }
  os << "<text x=\"" << x + 20 << "\" y=\"" << f.top + 10 << "\">" << fmt_num(hi).substr(0, 6) << "</text>\n";
  os << "<text x=\"" << x + 20 << "\" y=\"" << f.top + f.height << "\">" << fmt_num(lo).substr(0, 6) << "</text>\n";
  os << "<text x=\"" << x << "\" y=\"" << f.top + f.height + 20 << "\">" << label << "</text>\n";
  return os.str();
}

}  // namespace detail

/// Cell map of log10(100 xi) with contour polylines at xi = 2 % and 1.75 %.
inline std::string grid_svg_heatmap(const SweepGrid& g) {
  const detail::Frame f;
  const std::size_t n1 = g.size1(), n2 = g.size2();
  std::vector<std::vector<double>> xi(n1, std::vector<double>(n2, std::numeric_limits<double>::quiet_NaN()));
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : g.records) {
    if (r.failed || !r.xi || !(*r.xi > 0)) continue;
    xi[r.i1][r.i2] = *r.xi;
    const double v = std::log10(100.0 * *r.xi);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) {
    lo = std::isfinite(lo) ? lo - 0.5 : 0.0;
    hi = lo + 1.0;
  }
  std::ostringstream os;
  os << detail::svg_header(f, "log10(100 xi)");
  const double cw = f.width / static_cast<double>(n1), ch = f.height / static_cast<double>(n2);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const double v = xi[i][j];
      const std::string fill = std::isfinite(v) ? detail::palette((std::log10(100.0 * v) - lo) / (hi - lo)) : "#cccccc";
      os << "<rect x=\"" << f.left + cw * i << "\" y=\"" << f.top + f.height - ch * (j + 1) << "\" width=\"" << cw
         << "\" height=\"" << ch << "\" fill=\"" << fill << "\"/>\n";
    }
  }
  // Contours run through cell centres.
  auto px = [&](double gi) { return f.left + cw * (gi + 0.5); };
  auto py = [&](double gj) { return f.top + f.height - ch * (gj + 0.5); };
  const std::array<std::pair<double, const char*>, 2> levels{{{0.02, "black"}, {0.0175, "white"}}};
  for (const auto& [level, color] : levels) {
    os << "<g class=\"contour\" data-xi=\"" << level << "\" stroke=\"" << color
       << "\" stroke-width=\"2\" fill=\"none\">\n";
    for (const auto& s : detail::iso_segments(xi, level))
      os << "<polyline points=\"" << px(s.x0) << ',' << py(s.y0) << ' ' << px(s.x1) << ',' << py(s.y1) << "\"/>\n";
    os << "</g>\n";
  }
  os << detail::axis_labels(f, g) << detail::colorbar(f, lo, hi, "log10(100 xi)") << "</svg>\n";
  return os.str();
}

/// One marker per grid point at its axis values, coloured by log10 chi2.
inline std::string grid_svg_scatter(const SweepGrid& g) {
  const detail::Frame f;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : g.records)
    if (!r.failed && std::isfinite(r.log10_chi2)) {
      lo = std::min(lo, r.log10_chi2);
      hi = std::max(hi, r.log10_chi2);
    }
  if (!(hi > lo)) {
    lo = std::isfinite(lo) ? lo - 0.5 : 0.0;
    hi = lo + 1.0;
  }
  const auto [a1min, a1max] = std::minmax_element(g.axis1.values.begin(), g.axis1.values.end());
  const auto [a2min, a2max] = std::minmax_element(g.axis2.values.begin(), g.axis2.values.end());
  auto scale = [](double v, double a, double b) { return b > a ? (v - a) / (b - a) : 0.5; };
  std::ostringstream os;
  os << detail::svg_header(f, "log10 chi2");
  for (const auto& r : g.records) {
    const double x = f.left + f.width * scale(r.axis1, *a1min, *a1max);
    const double y = f.top + f.height * (1.0 - scale(r.axis2, *a2min, *a2max));
    const std::string fill =
        r.failed || !std::isfinite(r.log10_chi2) ? "#cccccc" : detail::palette((r.log10_chi2 - lo) / (hi - lo));
    os << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"5\" fill=\"" << fill << "\"/>\n";
  }
  os << detail::axis_labels(f, g) << detail::colorbar(f, lo, hi, "log10 chi2") << "</svg>\n";
  return os.str();
}

enum class EmitFormat { Csv, Json, SvgHeatmap, SvgScatter };

inline EmitFormat format_from_string(const std::string& s) {
  if (s == "csv") return EmitFormat::Csv;
  if (s == "json") return EmitFormat::Json;
  if (s == "svg-heatmap") return EmitFormat::SvgHeatmap;
  if (s == "svg-scatter") return EmitFormat::SvgScatter;
  throw ConfigError("unknown output format '" + s + "'");
}

inline void emit(const SweepGrid& g, EmitFormat fmt, const std::string& path) {
  if (g.records.empty()) throw ConfigError("cannot emit an empty sweep grid");
  switch (fmt) {
    case EmitFormat::Csv: detail::write_text(path, grid_csv(g)); break;
    case EmitFormat::Json: detail::write_text(path, to_json(g).dump(1) + "\n"); break;
    case EmitFormat::SvgHeatmap: detail::write_text(path, grid_svg_heatmap(g)); break;
    case EmitFormat::SvgScatter: detail::write_text(path, grid_svg_scatter(g)); break;
  }
}

inline SweepGrid load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return grid_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("'") + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace itrap
