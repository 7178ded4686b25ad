#pragma once

// Tokenizer for the colon-separated spec strings used on the command line and
// in config files, e.g. `mab:bernoulli:K=10:alpha=1` or `naive-mb:dist=gauss:1`.
//
// Leading tokens without '=' are positional. Once a key=value token has been
// seen, a bare token continues the previous value (so `dist=gauss:1` keeps the
// nested weight spec intact).

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mbe/errors.hpp"

namespace mbe {

class SpecString {
 public:
  explicit SpecString(std::string_view text) : text_(text) {
    if (text.empty()) throw ConfigError("empty spec string");
    std::size_t start = 0;
    std::string last_key;
    while (start <= text.size()) {
      const std::size_t end = std::min(text.find(':', start), text.size());
      const std::string tok(text.substr(start, end - start));
      const auto eq = tok.find('=');
      if (eq != std::string::npos) {
        last_key = tok.substr(0, eq);
        if (last_key.empty()) throw ConfigError("spec '" + text_ + "': empty key");
        if (kv_.count(last_key)) throw ConfigError("spec '" + text_ + "': duplicate key '" + last_key + "'");
        kv_[last_key] = tok.substr(eq + 1);
        order_.push_back(last_key);
      } else if (last_key.empty()) {
        if (tok.empty()) throw ConfigError("spec '" + text_ + "': empty token");
        positional_.push_back(tok);
      } else {
        kv_[last_key] += ":" + tok;
      }
      start = end + 1;
    }
  }

  [[nodiscard]] const std::string& text() const { return text_; }
  [[nodiscard]] const std::vector<std::string>& positional() const { return positional_; }
  [[nodiscard]] std::string positional(std::size_t i, const std::string& fallback = {}) const {
    return i < positional_.size() ? positional_[i] : fallback;
  }
  [[nodiscard]] bool has(const std::string& key) const { return kv_.count(key) != 0; }

  [[nodiscard]] std::string get(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  [[nodiscard]] double get_double(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : parse_double(it->second, key);
  }

  [[nodiscard]] std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : parse_int(it->second, key);
  }

  [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("spec '" + text_ + "': key '" + key + "' expects true/false");
  }

  [[nodiscard]] std::vector<double> get_list(const std::string& key) const {
    std::vector<double> out;
    auto it = kv_.find(key);
    if (it == kv_.end()) return out;
    std::string_view s = it->second;
    std::size_t start = 0;
    while (start <= s.size()) {
      const std::size_t end = std::min(s.find(',', start), s.size());
      out.push_back(parse_double(std::string(s.substr(start, end - start)), key));
      start = end + 1;
    }
    return out;
  }

  /// Rejects keys outside `allowed`.
  void require_keys(const std::set<std::string>& allowed) const {
    for (const auto& k : order_) {
      if (!allowed.count(k)) throw ConfigError("spec '" + text_ + "': unknown key '" + k + "'");
    }
  }

  /// Returns the spec text with `key` set to `value` (appended if absent).
  [[nodiscard]] std::string with(const std::string& key, const std::string& value) const {
    std::string out;
    for (const auto& p : positional_) out += (out.empty() ? "" : ":") + p;
    bool replaced = false;
    for (const auto& k : order_) {
      const std::string& v = (k == key) ? value : kv_.at(k);
      replaced = replaced || k == key;
      out += ":" + k + "=" + v;
    }
    if (!replaced) out += ":" + key + "=" + value;
    return out;
  }

  double parse_double(const std::string& s, const std::string& key) const {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      throw ConfigError("spec '" + text_ + "': key '" + key + "' has non-numeric value '" + s + "'");
    }
    return v;
  }

  std::int64_t parse_int(const std::string& s, const std::string& key) const {
    std::int64_t v = 0;
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), last, v);
    if (ec != std::errc() || ptr != last) {
      throw ConfigError("spec '" + text_ + "': key '" + key + "' expects an integer, got '" + s + "'");
    }
    return v;
  }

 private:
  std::string text_;
  std::vector<std::string> positional_;
  std::map<std::string, std::string> kv_;
  std::vector<std::string> order_;
};

}  // namespace mbe
