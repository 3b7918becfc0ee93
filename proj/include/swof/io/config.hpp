#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "swof/errors.hpp"

namespace swof::io {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Strict decimal parse of the whole token.
inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<long> parse_long(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto k = s.find(sep, start);
    out.push_back(trim(s.substr(start, k == std::string_view::npos ? k : k - start)));
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return out;
}

/// Flat `key = value` file. `[section]` lines prefix the keys that follow
/// with `section.`; `#` starts a comment. Every key must be consumed by the
/// reader, otherwise check_all_used() reports it.
class ConfigFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool used = false;
  };

  static ConfigFile parse(std::istream& in, std::string name,
                          std::filesystem::path base_dir = {}) {
    ConfigFile cfg;
    cfg.name_ = std::move(name);
    cfg.base_dir_ = std::move(base_dir);
    std::string section;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      std::string_view s = raw;
      if (const auto c = s.find('#'); c != std::string_view::npos) s = s.substr(0, c);
      s = trim(s);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw cfg.at_line(line, "unterminated section header");
        section = std::string(trim(s.substr(1, s.size() - 2)));
        if (section.empty()) throw cfg.at_line(line, "empty section name");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string_view::npos) throw cfg.at_line(line, "expected 'key = value'");
      const std::string_view k = trim(s.substr(0, eq));
      const std::string_view v = trim(s.substr(eq + 1));
      if (k.empty()) throw cfg.at_line(line, "missing key before '='");
      if (v.empty()) throw cfg.at_line(line, "missing value for '" + std::string(k) + "'");
      std::string key = section.empty() ? std::string(k) : section + "." + std::string(k);
      if (auto it = cfg.entries_.find(key); it != cfg.entries_.end())
        throw cfg.at_line(line, "duplicate key '" + key + "' (first set on line " +
                                    std::to_string(it->second.line) + ")");
      cfg.entries_.emplace(std::move(key), Entry{std::string(v), line});
    }
    return cfg;
  }

  static ConfigFile load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    return parse(in, path.string(), path.parent_path());
  }

  const std::string& name() const { return name_; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  int line(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  /// Error attributed to the line of `key` (or to the file when unset).
  ConfigError error(const std::string& key, const std::string& msg) const {
    const int l = line(key);
    return ConfigError(name_ + (l ? ":" + std::to_string(l) : std::string()) + ": " + key + ": " + msg);
  }
  void require(bool ok, const std::string& key, const std::string& msg) const {
    if (!ok) throw error(key, msg);
  }

  std::optional<std::string> string(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    it->second.used = true;
    return it->second.value;
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    return string(key).value_or(fallback);
  }
  std::string required_string(const std::string& key) const {
    auto v = string(key);
    if (!v) throw error(key, "required key is missing");
    return *v;
  }

  std::optional<double> number(const std::string& key) const {
    const auto v = string(key);
    if (!v) return std::nullopt;
    const auto d = parse_double(*v);
    if (!d || !std::isfinite(*d)) throw error(key, "'" + *v + "' is not a finite number");
    return d;
  }
  double number(const std::string& key, double fallback) const { return number(key).value_or(fallback); }
  double required_number(const std::string& key) const {
    const auto v = number(key);
    if (!v) throw error(key, "required key is missing");
    return *v;
  }

  std::optional<long> integer(const std::string& key) const {
    const auto v = string(key);
    if (!v) return std::nullopt;
    const auto d = parse_long(*v);
    if (!d) throw error(key, "'" + *v + "' is not an integer");
    return d;
  }
  long integer(const std::string& key, long fallback) const { return integer(key).value_or(fallback); }

  bool boolean(const std::string& key, bool fallback) const {
    const auto v = string(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "yes" || *v == "1") return true;
    if (*v == "false" || *v == "no" || *v == "0") return false;
    throw error(key, "'" + *v + "' is not a boolean");
  }

  std::vector<double> numbers(const std::string& key) const {
    const auto v = string(key);
    if (!v) return {};
    std::vector<double> out;
    for (auto tok : split(*v, ',')) {
      const auto d = parse_double(tok);
      if (!d || !std::isfinite(*d)) throw error(key, "'" + std::string(tok) + "' is not a finite number");
      out.push_back(*d);
    }
    return out;
  }

  /// Input file named by `key`, resolved against the config file's directory.
  std::optional<std::filesystem::path> path(const std::string& key) const {
    const auto v = string(key);
    if (!v) return std::nullopt;
    std::filesystem::path p(*v);
    return p.is_absolute() || base_dir_.empty() ? p : base_dir_ / p;
  }

  /// Keys starting with `prefix`, in file order.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::pair<int, std::string>> found;
    for (const auto& [k, e] : entries_)
      if (k.compare(0, prefix.size(), prefix) == 0) found.emplace_back(e.line, k);
    std::sort(found.begin(), found.end());
    std::vector<std::string> out;
    for (auto& f : found) out.push_back(std::move(f.second));
    return out;
  }

  void check_all_used() const {
    const Entry* first = nullptr;
    std::string key;
    for (const auto& [k, e] : entries_)
      if (!e.used && (!first || e.line < first->line)) {
        first = &e;
        key = k;
      }
    if (first) throw error(key, "unknown key, or not used by this configuration");
  }

 private:
  ConfigError at_line(int line, const std::string& msg) const {
    return ConfigError(name_ + ":" + std::to_string(line) + ": " + msg);
  }

  std::string name_;
  std::filesystem::path base_dir_;
  std::map<std::string, Entry> entries_;
};

}  // namespace swof::io
