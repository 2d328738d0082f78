#pragma once
// Flat key=value experiment configuration. One file describes one run:
// scalar keys, comma-separated lists, '#' comments. Parsing is strict in
// two stages: syntax errors (bad numbers, duplicate keys) fail here, and
// any key a driver never consumed fails afterwards, so a config cannot
// silently carry ignored settings.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gff2d/errors.hpp"

namespace gff2d {

enum class RunMode { discrete, metric, coupled };

inline const char* run_mode_name(RunMode m) {
  switch (m) {
    case RunMode::discrete: return "discrete";
    case RunMode::metric: return "metric";
    case RunMode::coupled: return "coupled";
  }
  return "?";
}

class Config {
 public:
  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("config: read failed on " + path);
    return parse_text(buf.str(), path);
  }

  static Config parse_text(const std::string& text,
                           const std::string& origin = "<inline>") {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": expected key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      if (cfg.values_.count(key))
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": duplicate key '" + key + "'");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  // Overrides from the command line; counts as consumed.
  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
    consumed_.insert(key);
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require_string(const std::string& key) {
    consumed_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end() || it->second.empty())
      throw ConfigError("config: missing required key '" + key + "'");
    return it->second;
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) {
    const auto it = lookup(key);
    return it == values_.end() ? fallback : to_int(key, it->second);
  }

  std::int64_t require_int(const std::string& key) {
    return to_int(key, require_string(key));
  }

  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) {
    const auto it = lookup(key);
    return it == values_.end() ? fallback : to_uint(key, it->second);
  }

  double get_real(const std::string& key, double fallback) {
    const auto it = lookup(key);
    return it == values_.end() ? fallback : to_real(key, it->second);
  }

  std::vector<std::int64_t> require_int_list(const std::string& key) {
    std::vector<std::int64_t> out;
    for (const std::string& item : split_list(require_string(key)))
      out.push_back(to_int(key, item));
    return out;
  }

  std::vector<std::int64_t> get_int_list(const std::string& key,
                                         std::vector<std::int64_t> fallback) {
    const auto it = lookup(key);
    if (it == values_.end()) return fallback;
    std::vector<std::int64_t> out;
    for (const std::string& item : split_list(it->second))
      out.push_back(to_int(key, item));
    return out;
  }

  std::vector<double> require_real_list(const std::string& key) {
    std::vector<double> out;
    for (const std::string& item : split_list(require_string(key)))
      out.push_back(to_real(key, item));
    return out;
  }

  std::vector<double> get_real_list(const std::string& key,
                                    std::vector<double> fallback) {
    const auto it = lookup(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (const std::string& item : split_list(it->second))
      out.push_back(to_real(key, item));
    return out;
  }

  RunMode get_mode(const std::string& key, RunMode fallback) {
    const auto it = lookup(key);
    if (it == values_.end()) return fallback;
    if (it->second == "discrete") return RunMode::discrete;
    if (it->second == "metric") return RunMode::metric;
    if (it->second == "coupled") return RunMode::coupled;
    throw ConfigError("config: " + key +
                      " must be discrete, metric or coupled, got '" +
                      it->second + "'");
  }

  // Fails on any key no accessor ever touched.
  void reject_unconsumed() const {
    for (const auto& [key, value] : values_)
      if (!consumed_.count(key))
        throw ConfigError("config: unknown key '" + key + "' for this command");
  }

  // Raw key/value pairs minus execution-only keys, for record provenance.
  // Worker count and output path cannot change results, and echoing them
  // would break byte-identity across worker counts.
  std::map<std::string, std::string> provenance() const {
    std::map<std::string, std::string> out = values_;
    out.erase("workers");
    out.erase("out");
    return out;
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;

  std::map<std::string, std::string>::const_iterator lookup(
      const std::string& key) {
    consumed_.insert(key);
    return values_.find(key);
  }

  static std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
  }

  static std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
      const auto comma = s.find(',', start);
      const std::string item =
          trim(comma == std::string::npos ? s.substr(start)
                                          : s.substr(start, comma - start));
      if (item.empty()) throw ConfigError("config: empty list item in '" + s + "'");
      out.push_back(item);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (out.empty()) throw ConfigError("config: empty list");
    return out;
  }

  static std::int64_t to_int(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const long long x = std::stoll(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
    }
  }

  static std::uint64_t to_uint(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const unsigned long long x = std::stoull(v, &used);
      if (used != v.size() || v[0] == '-') throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("config: " + key + " expects an unsigned integer, got '" +
                        v + "'");
    }
  }

  static double to_real(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
    }
  }
};

}  // namespace gff2d