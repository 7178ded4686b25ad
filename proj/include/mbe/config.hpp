#pragma once

// Line-oriented experiment config:
//
//   # comment
//   [experiment]
//   env = mab:bernoulli:K=10:alpha=1
//   T = 10000
//   [algorithms]
//   alg = mbe:lambda=0.5:sigma=1:B=50
//   alg = ts:bernoulli
//
// The same keys are reachable as command-line flags; see flag_setting().
// write_config() emits a file that parses back to the same RunConfig.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mbe/errors.hpp"
#include "mbe/io.hpp"
#include "mbe/simulator.hpp"

namespace mbe {

struct RunConfig {
  SimConfig sim;
  std::vector<double> grid;  ///< empty means the default sweep grid
  std::string meta_path;
  PlotOptions plot;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& where) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw ConfigError(where + ": expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

inline double parse_real(const std::string& v, const std::string& where) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw ConfigError(where + ": expected a number, got '" + v + "'");
  }
  return out;
}

inline bool parse_flag_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(where + ": expected true/false, got '" + v + "'");
}

inline std::vector<double> parse_grid(const std::string& v, const std::string& where) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) out.push_back(parse_real(trim(item), where));
  if (out.empty()) throw ConfigError(where + ": grid is empty");
  return out;
}

}  // namespace detail

/// Applies one `key = value` from `section`. `where` names the file line or
/// flag for error messages. Repeated `alg` keys accumulate.
inline void apply_setting(RunConfig& cfg, const std::string& section, const std::string& key,
                          const std::string& value, const std::string& where) {
  auto& s = cfg.sim;
  if (section == "experiment") {
    if (key == "id") s.experiment_id = value;
    else if (key == "env") s.env = value;
    else if (key == "T") s.T = detail::parse_u64(value, where);
    else if (key == "runs") s.n_runs = detail::parse_u64(value, where);
    else if (key == "seed") s.master_seed = detail::parse_u64(value, where);
    else if (key == "stride") s.checkpoint_stride = detail::parse_u64(value, where);
    else if (key == "threads") s.threads = detail::parse_u64(value, where);
    else if (key == "accounting") {
      if (value == "expected") s.accounting = RegretAccounting::Expected;
      else if (value == "realized") s.accounting = RegretAccounting::Realized;
      else throw ConfigError(where + ": accounting must be expected or realized");
    } else {
      throw ConfigError(where + ": unknown key '" + key + "' in [experiment]");
    }
  } else if (section == "algorithms") {
    if (key != "alg") throw ConfigError(where + ": unknown key '" + key + "' in [algorithms]");
    if (value.empty()) throw ConfigError(where + ": empty algorithm spec");
    s.algorithms.push_back(value);
  } else if (section == "output") {
    if (key == "raw") s.raw_csv = value;
    else if (key == "aggregate") s.aggregate_csv = value;
    else if (key == "svg") s.svg = value;
    else if (key == "meta") cfg.meta_path = value;
    else if (key == "log_x") cfg.plot.log_x = detail::parse_flag_bool(value, where);
    else if (key == "log_y") cfg.plot.log_y = detail::parse_flag_bool(value, where);
    else if (key == "title") cfg.plot.title = value;
    else throw ConfigError(where + ": unknown key '" + key + "' in [output]");
  } else if (section == "sweep") {
    if (key != "grid") throw ConfigError(where + ": unknown key '" + key + "' in [sweep]");
    cfg.grid = detail::parse_grid(value, where);
  } else {
    throw ConfigError(where + ": unknown section [" + section + "]");
  }
}

inline RunConfig parse_config_text(std::istream& in, const std::string& source, RunConfig cfg = {}) {
  std::string line, section;
  std::size_t n = 0;
  bool algs_reset = false;
  while (std::getline(in, line)) {
    ++n;
    const std::string where = source + ":" + std::to_string(n);
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + ": malformed section header");
      section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    if (section.empty()) throw ConfigError(where + ": setting outside a [section]");
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (section == "algorithms" && !algs_reset) {
      cfg.sim.algorithms.clear();
      algs_reset = true;
    }
    apply_setting(cfg, section, key, value, where);
  }
  return cfg;
}

inline RunConfig parse_config_file(const std::string& path, RunConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config_text(in, path, std::move(cfg));
}

/// Maps a long flag (without dashes) to its (section, key).
inline std::optional<std::pair<std::string, std::string>> flag_setting(const std::string& flag) {
  static const std::map<std::string, std::pair<std::string, std::string>> table = {
      {"id", {"experiment", "id"}},         {"env", {"experiment", "env"}},
      {"T", {"experiment", "T"}},           {"runs", {"experiment", "runs"}},
      {"seed", {"experiment", "seed"}},     {"stride", {"experiment", "stride"}},
      {"threads", {"experiment", "threads"}}, {"accounting", {"experiment", "accounting"}},
      {"alg", {"algorithms", "alg"}},       {"raw", {"output", "raw"}},
      {"aggregate", {"output", "aggregate"}}, {"svg", {"output", "svg"}},
      {"meta", {"output", "meta"}},         {"log-x", {"output", "log_x"}},
      {"log-y", {"output", "log_y"}},       {"title", {"output", "title"}},
      {"grid", {"sweep", "grid"}},
  };
  auto it = table.find(flag);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

/// Writes `cfg` in the config grammar. `comments` become leading # lines.
inline void write_config(std::ostream& out, const RunConfig& cfg, const std::vector<std::string>& comments = {}) {
  for (const auto& c : comments) out << "# " << c << '\n';
  const auto& s = cfg.sim;
  out << "[experiment]\n"
      << "id = " << s.experiment_id << '\n'
      << "env = " << s.env << '\n'
      << "T = " << s.T << '\n'
      << "runs = " << s.n_runs << '\n'
      << "seed = " << s.master_seed << '\n'
      << "stride = " << s.stride() << '\n'
      << "threads = " << s.threads << '\n'
      << "accounting = " << (s.accounting == RegretAccounting::Expected ? "expected" : "realized") << '\n'
      << "[algorithms]\n";
  for (const auto& a : s.algorithms) out << "alg = " << a << '\n';
  out << "[output]\n";
  if (!s.raw_csv.empty()) out << "raw = " << s.raw_csv << '\n';
  if (!s.aggregate_csv.empty()) out << "aggregate = " << s.aggregate_csv << '\n';
  if (!s.svg.empty()) out << "svg = " << s.svg << '\n';
  if (!cfg.meta_path.empty()) out << "meta = " << cfg.meta_path << '\n';
  out << "log_x = " << (cfg.plot.log_x ? "true" : "false") << '\n'
      << "log_y = " << (cfg.plot.log_y ? "true" : "false") << '\n';
  if (!cfg.plot.title.empty()) out << "title = " << cfg.plot.title << '\n';
  if (!cfg.grid.empty()) {
    out << "[sweep]\ngrid = ";
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) out << (i ? "," : "") << format_double(cfg.grid[i]);
    out << '\n';
  }
}

}  // namespace mbe
