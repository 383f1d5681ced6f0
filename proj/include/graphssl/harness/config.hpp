#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "graphssl/harness/benchmark.hpp"

namespace graphssl::harness {

/// Reader for the small TOML subset used by bench configs: `key = value`
/// lines with numbers, booleans, double-quoted strings or flat arrays of
/// those, plus a `[grid]` table.
namespace config_detail {

using Scalar = std::variant<double, bool, std::string>;
struct Value {
  std::vector<Scalar> items;
  bool array = false;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

inline Scalar parse_scalar(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  if (s.empty()) throw invalid_input(where + ": empty value");
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') throw invalid_input(where + ": unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) {
        ++i;
        out += s[i] == 'n' ? '\n' : s[i] == 't' ? '\t' : s[i];
      } else {
        out += s[i];
      }
    }
    return out;
  }
  std::string num;
  for (char ch : s)
    if (ch != '_') num += ch;
  try {
    std::size_t pos = 0;
    const double v = std::stod(num, &pos);
    if (pos != num.size()) throw std::invalid_argument(num);
    return v;
  } catch (const std::exception&) {
    throw invalid_input(where + ": cannot parse value '" + s + "'");
  }
}

inline Value parse_value(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  Value v;
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw invalid_input(where + ": arrays must close on the same line");
    v.array = true;
    std::string item;
    bool in_string = false;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      const char ch = s[i];
      if (ch == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
      if (ch == ',' && !in_string) {
        if (!trim(item).empty()) v.items.push_back(parse_scalar(item, where));
        item.clear();
      } else {
        item += ch;
      }
    }
    if (!trim(item).empty()) v.items.push_back(parse_scalar(item, where));
  } else {
    v.items.push_back(parse_scalar(s, where));
  }
  return v;
}

inline double as_number(const Value& v, const std::string& key) {
  if (v.array || v.items.size() != 1 || !std::holds_alternative<double>(v.items[0]))
    throw invalid_input("config key '" + key + "' expects a number");
  return std::get<double>(v.items[0]);
}

inline int as_int(const Value& v, const std::string& key) {
  const double d = as_number(v, key);
  if (d != static_cast<double>(static_cast<long long>(d))) throw invalid_input("config key '" + key + "' expects an integer");
  return static_cast<int>(d);
}

inline bool as_bool(const Value& v, const std::string& key) {
  if (v.array || v.items.size() != 1 || !std::holds_alternative<bool>(v.items[0]))
    throw invalid_input("config key '" + key + "' expects true or false");
  return std::get<bool>(v.items[0]);
}

inline std::vector<double> as_numbers(const Value& v, const std::string& key) {
  std::vector<double> out;
  for (const auto& s : v.items) {
    if (!std::holds_alternative<double>(s)) throw invalid_input("config key '" + key + "' expects numbers");
    out.push_back(std::get<double>(s));
  }
  if (out.empty()) throw invalid_input("config key '" + key + "' is empty");
  return out;
}

inline std::vector<std::string> as_strings(const Value& v, const std::string& key) {
  std::vector<std::string> out;
  for (const auto& s : v.items) {
    if (!std::holds_alternative<std::string>(s)) throw invalid_input("config key '" + key + "' expects strings");
    out.push_back(std::get<std::string>(s));
  }
  return out;
}

}  // namespace config_detail

/// Parses config text; relative dataset paths are resolved against `base_dir`.
inline BenchConfig parse_bench_config(const std::string& text, const std::filesystem::path& base_dir = {}) {
  using namespace config_detail;
  BenchConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "config line " + std::to_string(lineno);
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw invalid_input(where + ": malformed table header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "grid") throw invalid_input(where + ": unknown table [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw invalid_input(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const Value v = parse_value(line.substr(eq + 1), where);
    if (section == "grid") {
      if (key == "C" || key == "c") cfg.grids.c = as_numbers(v, key);
      else if (key == "theta") cfg.grids.theta = as_numbers(v, key);
      else if (key == "p_frac") cfg.grids.p_frac = as_numbers(v, key);
      else if (key == "alpha") cfg.grids.alpha = as_numbers(v, key);
      else if (key == "dk_alpha") cfg.grids.dk_alpha = as_number(v, key);
      else throw invalid_input(where + ": unknown grid key '" + key + "'");
      continue;
    }
    if (key == "seed") {
      const double s = as_number(v, key);
      if (s < 0 || s != static_cast<double>(static_cast<std::uint64_t>(s))) throw invalid_input(where + ": seed must be a non-negative integer");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "workers") {
      cfg.workers = as_int(v, key);
    } else if (key == "runs") {
      cfg.cv.runs = as_int(v, key);
    } else if (key == "external_folds") {
      cfg.cv.external_folds = as_int(v, key);
    } else if (key == "inner_folds") {
      cfg.cv.inner_folds = as_int(v, key);
    } else if (key == "stratified") {
      cfg.cv.stratified = as_bool(v, key);
    } else if (key == "feature_sets") {
      cfg.feature_sets.clear();
      for (double d : as_numbers(v, key)) cfg.feature_sets.push_back(static_cast<int>(d));
    } else if (key == "datasets") {
      cfg.datasets.clear();
      for (const auto& s : as_strings(v, key)) {
        std::filesystem::path p(s);
        cfg.datasets.push_back(p.is_absolute() || base_dir.empty() ? p : base_dir / p);
      }
    } else if (key == "methods") {
      cfg.methods.clear();
      for (const auto& s : as_strings(v, key)) cfg.methods.push_back(parse_method(s));
    } else {
      throw invalid_input(where + ": unknown key '" + key + "'");
    }
  }
  if (cfg.datasets.empty()) throw invalid_input("config lists no datasets");
  if (cfg.methods.empty()) throw invalid_input("config lists no methods");
  return cfg;
}

inline BenchConfig load_bench_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw invalid_input("cannot open config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_bench_config(ss.str(), file.parent_path());
}

}  // namespace graphssl::harness
