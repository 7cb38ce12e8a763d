#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "odyssey/core/types.hpp"
#include "odyssey/models/gmm_io.hpp"  // detail::format_double

namespace odyssey {

enum class ReportKind { table, reward_vs_param, lipschitz_curve, regret_loglog };

inline ReportKind parse_report_kind(const std::string& s) {
  if (s == "table") return ReportKind::table;
  if (s == "reward_vs_param") return ReportKind::reward_vs_param;
  if (s == "lipschitz_curve") return ReportKind::lipschitz_curve;
  if (s == "regret_loglog") return ReportKind::regret_loglog;
  throw ConfigError("unknown report kind '" + s +
                    "' (expected table|reward_vs_param|lipschitz_curve|regret_loglog)");
}

// Minimal column-table CSV (no quoting; our emitters never need it).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }

  int require_column(const std::string& name) const {
    int c = column(name);
    if (c < 0) throw ConfigError("input rows are missing required column '" + name + "'");
    return c;
  }

  double number(std::size_t row, int col) const {
    const std::string& s = rows[row][static_cast<std::size_t>(col)];
    try {
      return std::stod(s);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse '" + s + "' as a number");
    }
  }
};

inline CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    fields.push_back(cur);
    if (first) {
      t.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != t.header.size())
        throw ConfigError("csv row has " + std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(t.header.size()));
      t.rows.push_back(std::move(fields));
    }
  }
  if (first) throw ConfigError("empty csv input");
  return t;
}

inline CsvTable load_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  return parse_csv(f);
}

inline void write_csv(const CsvTable& t, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  for (std::size_t i = 0; i < t.header.size(); ++i) f << (i ? "," : "") << t.header[i];
  f << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
    f << "\n";
  }
}

namespace detail {

struct Series {
  double x, mean, stddev;
};

// Self-contained SVG line chart with optional log axes and error bars.
inline std::string render_plot_svg(const std::vector<Series>& pts, const std::string& title,
                                   const std::string& xlabel, const std::string& ylabel,
                                   bool logx, bool logy, const std::string& annotation = "") {
  const double w = 640, h = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  auto tx = [&](double v) { return logx ? std::log10(std::max(v, 1e-300)) : v; };
  auto ty = [&](double v) { return logy ? std::log10(std::max(v, 1e-300)) : v; };

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& p : pts) {
    xmin = std::min(xmin, tx(p.x));
    xmax = std::max(xmax, tx(p.x));
    double lo = logy ? ty(std::max(p.mean - p.stddev, p.mean * 0.1)) : ty(p.mean - p.stddev);
    double hi = ty(p.mean + p.stddev);
    ymin = std::min({ymin, ty(p.mean), lo});
    ymax = std::max({ymax, ty(p.mean), hi});
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  double xpad = 0.05 * (xmax - xmin), ypad = 0.08 * (ymax - ymin);
  xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;

  auto px = [&](double v) { return ml + (tx(v) - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double v) { return h - mb - (ty(v) - ymin) / (ymax - ymin) * (h - mt - mb); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" << title << "</text>\n";
  // axes
  svg << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
      << h - mb << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
  // ticks
  for (int i = 0; i <= 4; ++i) {
    double fx = xmin + (xmax - xmin) * i / 4.0;
    double fy = ymin + (ymax - ymin) * i / 4.0;
    double gx = ml + (w - ml - mr) * i / 4.0;
    double gy = h - mb - (h - mt - mb) * i / 4.0;
    double vx = logx ? std::pow(10.0, fx) : fx;
    double vy = logy ? std::pow(10.0, fy) : fy;
    char bx[32], by[32];
    std::snprintf(bx, sizeof(bx), "%.3g", vx);
    std::snprintf(by, sizeof(by), "%.3g", vy);
    svg << "<line x1=\"" << gx << "\" y1=\"" << h - mb << "\" x2=\"" << gx << "\" y2=\""
        << h - mb + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << gx << "\" y=\"" << h - mb + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << bx
        << "</text>\n";
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << gy << "\" x2=\"" << ml << "\" y2=\"" << gy
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << gy + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << by
        << "</text>\n";
  }
  svg << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xlabel
      << "</text>\n";
  svg << "<text x=\"16\" y=\"" << (mt + h - mb) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 16 " << (mt + h - mb) / 2 << ")\">" << ylabel << "</text>\n";

  // error bars, polyline, points
  for (const auto& p : pts) {
    if (p.stddev > 0.0) {
      double lo = logy ? std::max(p.mean - p.stddev, p.mean * 0.1) : p.mean - p.stddev;
      svg << "<line x1=\"" << px(p.x) << "\" y1=\"" << py(lo) << "\" x2=\"" << px(p.x)
          << "\" y2=\"" << py(p.mean + p.stddev) << "\" stroke=\"#4477aa\" stroke-width=\"1\"/>\n";
    }
  }
  svg << "<polyline fill=\"none\" stroke=\"#4477aa\" stroke-width=\"2\" points=\"";
  for (const auto& p : pts) svg << px(p.x) << "," << py(p.mean) << " ";
  svg << "\"/>\n";
  for (const auto& p : pts)
    svg << "<circle cx=\"" << px(p.x) << "\" cy=\"" << py(p.mean)
        << "\" r=\"3\" fill=\"#4477aa\"/>\n";
  if (!annotation.empty())
    svg << "<text x=\"" << w - mr - 6 << "\" y=\"" << mt + 14
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << annotation
        << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

inline void grouped_mean_std(const CsvTable& in, int key_col, int val_col,
                             std::vector<std::pair<std::string, std::pair<double, double>>>* out) {
  std::map<std::string, std::vector<double>> groups;
  for (std::size_t r = 0; r < in.rows.size(); ++r)
    groups[in.rows[r][static_cast<std::size_t>(key_col)]].push_back(in.number(r, val_col));
  for (auto& [key, vals] : groups) {
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var = vals.size() > 1 ? var / (vals.size() - 1) : 0.0;
    out->emplace_back(key, std::make_pair(mean, std::sqrt(var)));
  }
}

}  // namespace detail

// Renders rows into a self-contained SVG plus the aggregated CSV next to it
// (<stem>_data.csv, never colliding with the input rows file). Aggregation is
// mean +/- std grouped by the x-axis parameter.
inline void emit_report(ReportKind kind, const CsvTable& in, const std::string& out_svg,
                        const std::string& x_param = "") {
  if (in.rows.empty()) throw ConfigError("emit_report: no rows to plot");

  std::string out_csv = out_svg;
  if (auto dot = out_csv.rfind('.'); dot != std::string::npos) out_csv.resize(dot);
  out_csv += "_data.csv";

  auto write_svg = [&](const std::string& content) {
    std::ofstream f(out_svg);
    if (!f) throw ConfigError("cannot write '" + out_svg + "'");
    f << content;
  };

  switch (kind) {
    case ReportKind::table: {
      int key = in.require_column("method");
      int val = in.require_column("final_reward");
      std::vector<std::pair<std::string, std::pair<double, double>>> agg;
      detail::grouped_mean_std(in, key, val, &agg);
      CsvTable out;
      out.header = {"method", "final_reward_mean", "final_reward_std", "rows"};
      std::ostringstream svg;
      double h = 60.0 + 22.0 * agg.size();
      svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"520\" height=\"" << h
          << "\"><rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
          << "<text x=\"12\" y=\"24\" font-family=\"monospace\" font-size=\"14\">method  "
             "mean  std</text>\n";
      double y = 48.0;
      for (const auto& [k, ms] : agg) {
        std::map<std::string, std::vector<double>> counts;
        std::size_t n = 0;
        for (std::size_t r = 0; r < in.rows.size(); ++r)
          if (in.rows[r][static_cast<std::size_t>(key)] == k) ++n;
        out.rows.push_back({k, detail::format_double(ms.first), detail::format_double(ms.second),
                            std::to_string(n)});
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-12s %.4f  %.4f", k.c_str(), ms.first, ms.second);
        svg << "<text x=\"12\" y=\"" << y << "\" font-family=\"monospace\" font-size=\"13\">"
            << buf << "</text>\n";
        y += 22.0;
      }
      svg << "</svg>\n";
      write_svg(svg.str());
      write_csv(out, out_csv);
      break;
    }
    case ReportKind::reward_vs_param: {
      std::string x = x_param;
      if (x.empty()) {
        // Infer: the sweep parameter with more than one distinct value.
        for (const char* cand : {"N", "K_mean", "lambda", "epsilon", "S", "B", "T"}) {
          int c = in.column(cand);
          if (c < 0) continue;
          std::set<std::string> distinct;
          for (const auto& row : in.rows) distinct.insert(row[static_cast<std::size_t>(c)]);
          if (distinct.size() > 1) {
            if (!x.empty())
              throw ConfigError("reward_vs_param: ambiguous x axis (" + x + " and " + cand +
                                " both vary); pass --x");
            x = cand;
          }
        }
        if (x.empty()) throw ConfigError("reward_vs_param: no varying parameter column found");
      }
      int xc = in.require_column(x);
      int val = in.require_column("final_reward");
      std::vector<std::pair<std::string, std::pair<double, double>>> agg;
      detail::grouped_mean_std(in, xc, val, &agg);
      std::vector<detail::Series> pts;
      for (const auto& [k, ms] : agg) pts.push_back({std::stod(k), ms.first, ms.second});
      std::sort(pts.begin(), pts.end(),
                [](const detail::Series& a, const detail::Series& b) { return a.x < b.x; });
      write_svg(detail::render_plot_svg(pts, "mean reward vs " + x, x, "final_reward", false,
                                        false));
      CsvTable out;
      out.header = {x, "final_reward_mean", "final_reward_std"};
      for (const auto& p : pts)
        out.rows.push_back({detail::format_double(p.x), detail::format_double(p.mean),
                            detail::format_double(p.stddev)});
      write_csv(out, out_csv);
      break;
    }
    case ReportKind::lipschitz_curve: {
      int xc = in.require_column("sigma_t");
      int mc = in.require_column("grad_norm_mean");
      int sc = in.require_column("grad_norm_std");
      std::vector<detail::Series> pts;
      for (std::size_t r = 0; r < in.rows.size(); ++r)
        pts.push_back({in.number(r, xc), in.number(r, mc), in.number(r, sc)});
      std::sort(pts.begin(), pts.end(),
                [](const detail::Series& a, const detail::Series& b) { return a.x < b.x; });
      write_svg(detail::render_plot_svg(pts, "reward sensitivity vs noise level", "sigma_t",
                                        "grad norm", true, false));
      write_csv(in, out_csv);
      break;
    }
    case ReportKind::regret_loglog: {
      int xc = in.require_column("M");
      int mc = in.require_column("simple_regret_mean");
      int sc = in.require_column("simple_regret_std");
      int sl = in.require_column("fitted_slope");
      std::vector<detail::Series> pts;
      for (std::size_t r = 0; r < in.rows.size(); ++r)
        pts.push_back({in.number(r, xc), in.number(r, mc), in.number(r, sc)});
      std::sort(pts.begin(), pts.end(),
                [](const detail::Series& a, const detail::Series& b) { return a.x < b.x; });
      char note[64];
      std::snprintf(note, sizeof(note), "slope = %.3f", in.number(0, sl));
      write_svg(detail::render_plot_svg(pts, "simple regret vs M = eps*N*K", "M", "simple regret",
                                        true, true, note));
      write_csv(in, out_csv);
      break;
    }
  }
}

}  // namespace odyssey
