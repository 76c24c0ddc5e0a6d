#include <spinlab/config.hpp>

#include <cerrno>
#include <climits>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace spinlab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parseString(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineNo) + ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineNo) + ": empty section name");
      cfg.sections_[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineNo) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineNo) + ": empty key");
    auto& sec = cfg.sections_[section];
    if (!sec.emplace(key, value).second)
      throw ConfigError(origin + ":" + std::to_string(lineNo) + ": duplicate key '" + key +
                        "' in section [" + section + "]");
  }
  return cfg;
}

Config Config::parseFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parseString(buf.str(), path);
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string Config::require(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s != sections_.end()) {
    const auto k = s->second.find(key);
    if (k != s->second.end()) return k->second;
  }
  throw ConfigError(origin_ + ": missing required key '" + key + "' in section [" + section + "]");
}

std::string Config::get(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
  return has(section, key) ? require(section, key) : fallback;
}

namespace {

double parseDouble(const std::string& where, const std::string& raw) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(raw.c_str(), &end);
  if (end != raw.c_str() + raw.size() || raw.empty() || errno == ERANGE)
    throw ConfigError(where + ": not a number: '" + raw + "'");
  return v;
}

long long parseInteger(const std::string& where, const std::string& raw) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(raw.c_str(), &end, 10);
  if (end != raw.c_str() + raw.size() || raw.empty() || errno == ERANGE)
    throw ConfigError(where + ": not an integer: '" + raw + "'");
  return v;
}

}  // namespace

double Config::requireDouble(const std::string& section, const std::string& key) const {
  return parseDouble(section + "." + key, require(section, key));
}

double Config::getDouble(const std::string& section, const std::string& key,
                         double fallback) const {
  return has(section, key) ? requireDouble(section, key) : fallback;
}

int Config::requireInt(const std::string& section, const std::string& key) const {
  const long long v = parseInteger(section + "." + key, require(section, key));
  if (v < INT_MIN || v > INT_MAX)
    throw ConfigError(section + "." + key + ": out of int range");
  return static_cast<int>(v);
}

int Config::getInt(const std::string& section, const std::string& key, int fallback) const {
  return has(section, key) ? requireInt(section, key) : fallback;
}

std::uint64_t Config::getU64(const std::string& section, const std::string& key,
                             std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = require(section, key);
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw.c_str(), &end, 10);
  if (end != raw.c_str() + raw.size() || raw.empty() || errno == ERANGE)
    throw ConfigError(section + "." + key + ": not an unsigned integer: '" + raw + "'");
  return v;
}

bool Config::getBool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = require(section, key);
  if (raw == "true" || raw == "yes" || raw == "1") return true;
  if (raw == "false" || raw == "no" || raw == "0") return false;
  throw ConfigError(section + "." + key + ": not a boolean: '" + raw + "'");
}

std::vector<int> Config::getIntList(const std::string& section, const std::string& key,
                                    const std::vector<int>& fallback) const {
  if (!has(section, key)) return fallback;
  std::istringstream in(require(section, key));
  std::vector<int> out;
  std::string tok;
  while (in >> tok)
    out.push_back(static_cast<int>(parseInteger(section + "." + key, tok)));
  if (out.empty()) throw ConfigError(section + "." + key + ": empty list");
  return out;
}

std::vector<std::string> Config::getStringList(const std::string& section, const std::string& key,
                                               const std::vector<std::string>& fallback) const {
  if (!has(section, key)) return fallback;
  std::istringstream in(require(section, key));
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  if (out.empty()) throw ConfigError(section + "." + key + ": empty list");
  return out;
}

void Config::validate(const std::map<std::string, std::set<std::string>>& schema) const {
  for (const auto& [section, entries] : sections_) {
    const auto it = schema.find(section);
    if (it == schema.end())
      throw ConfigError(origin_ + ": unknown section [" + section + "]");
    for (const auto& [key, value] : entries)
      if (it->second.count(key) == 0)
        throw ConfigError(origin_ + ": unknown key '" + key + "' in section [" + section + "]");
  }
}

}  // namespace spinlab
