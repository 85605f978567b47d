#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "geotree/error.hpp"

namespace geotree {

/// One `key = value` line. Keys before the first `[section]` header have an
/// empty section.
struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  std::size_t line = 0;
};

class ConfigError : public InvalidInput {
public:
  ConfigError(std::size_t line, const std::string& what)
      : InvalidInput("config line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

namespace detail {
inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
inline bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  return true;
}
} // namespace detail

/// Grammar: blank lines and lines starting with '#' or ';' are ignored;
/// `[name]` opens a section; everything else must be `key = value`.
inline std::vector<ConfigEntry> parse_config(std::istream& in) {
  std::vector<ConfigEntry> out;
  std::string section, raw;
  std::size_t ln = 0;
  while (std::getline(in, raw)) {
    ++ln;
    const std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(ln, "unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (!detail::valid_name(section)) throw ConfigError(ln, "bad section name '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(ln, "expected 'key = value'");
    ConfigEntry e{section, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), ln};
    if (!detail::valid_name(e.key)) throw ConfigError(ln, "bad key '" + e.key + "'");
    if (e.value.empty()) throw ConfigError(ln, "missing value for '" + e.key + "'");
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<ConfigEntry> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file '" + path + "'");
  return parse_config(in);
}

} // namespace geotree
