#pragma once

// CSV emission and parsing for experiment results, and SVG regret plots.
//
// Numbers are written in the shortest form that round-trips (std::to_chars),
// so parsing an emitted file reproduces the in-memory doubles exactly. Fields
// holding spec strings are quoted when they contain commas or quotes.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mbe/errors.hpp"
#include "mbe/simulator.hpp"

namespace mbe {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Splits CSV text into records (RFC 4180 quoting).
inline std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw IoError("csv: unterminated quoted field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_raw_csv(std::ostream& out, const ExperimentResult& res) {
  out << "experiment_id,algorithm,run,t,cum_regret\n";
  const std::string id = csv_field(res.experiment_id);
  for (std::size_t a = 0; a < res.algorithms.size(); ++a) {
    const std::string alg = csv_field(res.algorithms[a]);
    for (std::size_t r = 0; r < res.raw[a].size(); ++r)
      for (std::size_t c = 0; c < res.checkpoints.size(); ++c)
        out << id << ',' << alg << ',' << r << ',' << res.checkpoints[c] << ',' << format_double(res.raw[a][r][c])
            << '\n';
  }
}

inline void write_aggregate_csv(std::ostream& out, const AggregatedResult& agg) {
  out << "experiment_id,algorithm,t,mean_regret,stderr,n_runs\n";
  const std::string id = csv_field(agg.experiment_id);
  for (const auto& s : agg.series) {
    const std::string alg = csv_field(s.algorithm);
    for (std::size_t c = 0; c < s.t.size(); ++c)
      out << id << ',' << alg << ',' << s.t[c] << ',' << format_double(s.mean[c]) << ','
          << format_double(s.stderr_[c]) << ',' << s.n_runs << '\n';
  }
}

namespace detail {

inline double parse_csv_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw IoError("csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

inline std::size_t parse_csv_size(const std::string& s, std::size_t line) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw IoError("csv line " + std::to_string(line) + ": bad integer '" + s + "'");
  }
  return v;
}

template <class Callable>
void write_file(const std::string& path, Callable&& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  body(out);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace detail

/// Reads an aggregate CSV. Series appear in first-seen order.
inline AggregatedResult read_aggregate_csv(std::istream& in) {
  const auto rows = parse_csv(in);
  if (rows.empty() || rows[0] != std::vector<std::string>{"experiment_id", "algorithm", "t", "mean_regret", "stderr",
                                                          "n_runs"}) {
    throw IoError("aggregate csv: missing or wrong header");
  }
  AggregatedResult agg;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 6) throw IoError("aggregate csv line " + std::to_string(i + 1) + ": expected 6 fields");
    if (agg.series.empty()) agg.experiment_id = r[0];
    auto [it, fresh] = index.emplace(r[1], agg.series.size());
    if (fresh) {
      agg.series.emplace_back();
      agg.series.back().algorithm = r[1];
    }
    auto& s = agg.series[it->second];
    s.t.push_back(detail::parse_csv_size(r[2], i + 1));
    s.mean.push_back(detail::parse_csv_double(r[3], i + 1));
    s.stderr_.push_back(detail::parse_csv_double(r[4], i + 1));
    s.n_runs = detail::parse_csv_size(r[5], i + 1);
  }
  return agg;
}

inline AggregatedResult read_aggregate_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_aggregate_csv(in);
}

inline void emit_raw_csv(const ExperimentResult& res, const std::string& path) {
  detail::write_file(path, [&](std::ostream& o) { write_raw_csv(o, res); });
}

inline void emit_aggregate_csv(const AggregatedResult& agg, const std::string& path) {
  if (agg.series.empty()) throw ContractViolation("emit_aggregate_csv: no series");
  detail::write_file(path, [&](std::ostream& o) { write_aggregate_csv(o, agg); });
}

// ---------------------------------------------------------------------------
// SVG

struct PlotOptions {
  bool log_x = false;
  bool log_y = false;
  std::string title;
  std::string x_label = "round t";
  std::string y_label = "cumulative regret";
  int width = 720;
  int height = 480;
};

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

namespace detail {

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;
  double px_lo = 0.0, px_hi = 1.0;

  [[nodiscard]] double map(double v) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    return px_lo + (x - a) / (b - a) * (px_hi - px_lo);
  }

  [[nodiscard]] std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double p = std::floor(std::log10(lo)); p <= std::ceil(std::log10(hi)); p += 1.0) {
        const double v = std::pow(10.0, p);
        if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) out.push_back(v);
      }
      return out;
    }
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) out.push_back(v == 0.0 ? 0.0 : v);
    return out;
  }
};

inline std::string tick_label(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

}  // namespace detail

/// Mean curves with shaded +-1 stderr bands, legend and axis labels.
inline void write_plot_svg(std::ostream& out, const AggregatedResult& agg, const PlotOptions& opt = {}) {
  if (agg.series.empty()) throw ContractViolation("write_plot_svg: no series");
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  static const char* kDashes[] = {"", "6,3", "2,2", "8,3,2,3"};

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin, ypos = xmin;
  for (const auto& s : agg.series) {
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      const double t = static_cast<double>(s.t[i]);
      xmin = std::min(xmin, t);
      xmax = std::max(xmax, t);
      const double lo = s.mean[i] - s.stderr_[i], hi = s.mean[i] + s.stderr_[i];
      ymin = std::min(ymin, lo);
      ymax = std::max(ymax, hi);
      if (s.mean[i] > 0.0) ypos = std::min(ypos, s.mean[i]);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0;
  if (opt.log_y) {
    if (!std::isfinite(ypos)) ypos = 1.0;
    ymin = ypos;
    ymax = std::max(ymax, ymin * 10.0);
  } else {
    ymin = std::min(ymin, 0.0);
    if (!(ymax > ymin)) ymax = ymin + 1.0;
  }
  if (opt.log_x) xmin = std::max(xmin, 1.0);
  if (!(xmax > xmin)) xmax = opt.log_x ? xmin * 10.0 : xmin + 1.0;

  const double left = 70, right = 190, top = 40, bottom = 55;
  detail::Axis ax{xmin, xmax, opt.log_x, left, opt.width - right};
  detail::Axis ay{ymin, ymax, opt.log_y, opt.height - bottom, top};
  auto clamp_y = [&](double v) { return opt.log_y ? std::max(v, ymin) : v; };
  auto pt = [](double x, double y) { return format_double(std::round(x * 100) / 100) + "," + format_double(std::round(y * 100) / 100); };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << opt.width << "\" height=\""
      << opt.height << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << opt.width << "\" height=\"" << opt.height << "\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    out << "<text x=\"" << opt.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
        << xml_escape(opt.title) << "</text>\n";

  out << "<g font-family=\"sans-serif\" font-size=\"11\" stroke=\"none\" fill=\"#333\">\n";
  for (double v : ax.ticks()) {
    const double x = ax.map(v);
    out << "<line x1=\"" << format_double(x) << "\" y1=\"" << ay.px_lo << "\" x2=\"" << format_double(x) << "\" y2=\""
        << ay.px_hi << "\" stroke=\"#e5e5e5\"/>\n"
        << "<text x=\"" << format_double(x) << "\" y=\"" << ay.px_lo + 16 << "\" text-anchor=\"middle\">"
        << detail::tick_label(v) << "</text>\n";
  }
  for (double v : ay.ticks()) {
    const double y = ay.map(v);
    out << "<line x1=\"" << ax.px_lo << "\" y1=\"" << format_double(y) << "\" x2=\"" << ax.px_hi << "\" y2=\""
        << format_double(y) << "\" stroke=\"#e5e5e5\"/>\n"
        << "<text x=\"" << ax.px_lo - 6 << "\" y=\"" << format_double(y + 4) << "\" text-anchor=\"end\">"
        << detail::tick_label(v) << "</text>\n";
  }
  out << "<rect x=\"" << ax.px_lo << "\" y=\"" << ay.px_hi << "\" width=\"" << ax.px_hi - ax.px_lo << "\" height=\""
      << ay.px_lo - ay.px_hi << "\" fill=\"none\" stroke=\"#333\"/>\n"
      << "<text x=\"" << (ax.px_lo + ax.px_hi) / 2 << "\" y=\"" << opt.height - 15 << "\" text-anchor=\"middle\">"
      << xml_escape(opt.x_label) << (opt.log_x ? " (log)" : "") << "</text>\n"
      << "<text transform=\"translate(18," << (ay.px_lo + ay.px_hi) / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(opt.y_label) << (opt.log_y ? " (log)" : "")
      << "</text>\n</g>\n";

  for (std::size_t k = 0; k < agg.series.size(); ++k) {
    const auto& s = agg.series[k];
    const char* color = kColors[k % 8];
    const char* dash = kDashes[(k / 8 + k) % 4];
    std::string band, line;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      const double t = static_cast<double>(s.t[i]);
      if (opt.log_x && t < xmin) continue;
      band += (band.empty() ? "M" : " L") + pt(ax.map(t), ay.map(clamp_y(s.mean[i] + s.stderr_[i])));
      line += (line.empty() ? "" : " ") + pt(ax.map(t), ay.map(clamp_y(s.mean[i])));
    }
    for (std::size_t i = s.t.size(); i-- > 0;) {
      const double t = static_cast<double>(s.t[i]);
      if (opt.log_x && t < xmin) continue;
      band += " L" + pt(ax.map(t), ay.map(clamp_y(s.mean[i] - s.stderr_[i])));
    }
    const std::string name = xml_escape(s.algorithm);
    out << "<g>\n<title>" << name << "</title>\n";
    if (!band.empty()) out << "<path d=\"" << band << " Z\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    out << "<polyline points=\"" << line << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\"";
    if (*dash) out << " stroke-dasharray=\"" << dash << "\"";
    out << "/>\n</g>\n";

    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    const double lx = opt.width - right + 12;
    out << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly << "\" stroke=\""
        << color << "\" stroke-width=\"2\"";
    if (*dash) out << " stroke-dasharray=\"" << dash << "\"";
    out << "/>\n<text x=\"" << lx + 30 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#333\">" << name << "</text>\n";
  }
  out << "</svg>\n";
}

inline void emit_plot_svg(const AggregatedResult& agg, const std::string& path, const PlotOptions& opt = {}) {
  detail::write_file(path, [&](std::ostream& o) { write_plot_svg(o, agg, opt); });
}

}  // namespace mbe
