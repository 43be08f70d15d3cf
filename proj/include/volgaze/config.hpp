#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "volgaze/common.hpp"

namespace volgaze {

/// Parsed key=value config: global keys first, then one [case.ID] section per
/// case, in file order.
struct ConfigFile {
  std::map<std::string, std::string> globals;
  std::vector<std::pair<std::string, std::map<std::string, std::string>>> cases;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace detail

/// Minimal config format: `key = value` lines, full-line # comments, and
/// `[case.ID]` sections grouping per-case keys. Values may be double-quoted.
/// Within a scope the last assignment of a key wins.
inline ConfigFile parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  ConfigFile cfg;
  std::map<std::string, std::string>* scope = &cfg.globals;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::string where = path + ": line " + std::to_string(line_no);
    if (t.front() == '[') {
      if (t.back() != ']') throw InputError(where + ": unterminated section header");
      const std::string name = detail::trim(t.substr(1, t.size() - 2));
      const std::string prefix = "case.";
      if (name.compare(0, prefix.size(), prefix) != 0 || name.size() == prefix.size())
        throw InputError(where + ": only [case.ID] sections are recognized, got [" + name + "]");
      cfg.cases.emplace_back(name.substr(prefix.size()), std::map<std::string, std::string>{});
      scope = &cfg.cases.back().second;
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw InputError(where + ": expected 'key = value' or '[case.ID]'");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::unquote(detail::trim(t.substr(eq + 1)));
    if (key.empty()) throw InputError(where + ": empty key");
    (*scope)[key] = value;
  }
  return cfg;
}

inline double config_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw InputError("config key '" + key + "': not a number: '" + value + "'");
  return v;
}

inline long config_long(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw InputError("config key '" + key + "': not an integer: '" + value + "'");
  return v;
}

}  // namespace volgaze
