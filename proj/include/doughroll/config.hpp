// Copyright 2026 The doughroll Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal TOML-style key/value files:
//
//   # comment
//   name = "experiment1"
//   [planning]
//   horizon = 10
//   goals_in = [2, 4, 6]
//
// Keys inside a [section] are stored as "section.key". Values are kept as
// raw strings and converted on lookup.

#ifndef DOUGHROLL_CONFIG_HPP_
#define DOUGHROLL_CONFIG_HPP_

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "doughroll/common.hpp"

namespace doughroll {

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = strip(strip_comment(line));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) {
          throw ParseError(lineno, "malformed section header");
        }
        section = strip(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
      std::string key = strip(line.substr(0, eq));
      std::string value = strip(line.substr(eq + 1));
      if (key.empty() || value.empty()) throw ParseError(lineno, "empty key or value");
      if (!section.empty()) key = section + "." + key;
      if (cfg.values_.contains(key)) throw ParseError(lineno, "duplicate key " + key);
      cfg.values_[key] = {value, lineno};
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path);
    return parse(in);
  }

  bool has(const std::string& key) const { return values_.contains(key); }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
  }

  std::optional<double> number(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return to_number(it->second.text, it->second.line);
  }

  double number_or(const std::string& key, double fallback) const {
    return number(key).value_or(fallback);
  }

  std::optional<std::string> string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return unquote(it->second.text, it->second.line);
  }

  std::string string_or(const std::string& key, const std::string& fallback) const {
    return string(key).value_or(fallback);
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    const auto it = values_.find(key);
    if (it == values_.end()) return out;
    for (const auto& item : split_array(it->second.text, it->second.line)) {
      out.push_back(to_number(item, it->second.line));
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key) const {
    std::vector<std::string> out;
    const auto it = values_.find(key);
    if (it == values_.end()) return out;
    for (const auto& item : split_array(it->second.text, it->second.line)) {
      out.push_back(unquote(item, it->second.line));
    }
    return out;
  }

 private:
  struct Entry {
    std::string text;
    std::size_t line = 0;
  };

  static std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') quoted = !quoted;
      if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
  }

  static double to_number(const std::string& text, std::size_t line) {
    const std::string t = strip(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      throw ParseError(line, "not a number: " + t);
    }
    return v;
  }

  static std::string unquote(const std::string& text, std::size_t line) {
    const std::string t = strip(text);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') {
      return t.substr(1, t.size() - 2);
    }
    if (t.find_first_of("\"[]") != std::string::npos) {
      throw ParseError(line, "malformed string: " + t);
    }
    return t;
  }

  static std::vector<std::string> split_array(const std::string& text, std::size_t line) {
    const std::string t = strip(text);
    if (t.empty() || t.front() != '[') return {t};
    if (t.back() != ']') throw ParseError(line, "unterminated array");
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
      const char c = t[i];
      if (c == '"') quoted = !quoted;
      if (c == ',' && !quoted) {
        out.push_back(strip(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!strip(cur).empty()) out.push_back(strip(cur));
    for (const auto& item : out) {
      if (item.empty()) throw ParseError(line, "empty array element");
    }
    return out;
  }

  std::map<std::string, Entry> values_;
};

}  // namespace doughroll

#endif  // DOUGHROLL_CONFIG_HPP_
