#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinlab {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Sectioned key-value text: [section] headers, key = value lines, full-line
// comments starting with '#' or ';'.  Keys live under the section above them;
// lines before any header go to the unnamed section "".
class Config {
public:
  static Config parseString(const std::string& text, const std::string& origin = "<string>");
  static Config parseFile(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;

  std::string require(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;

  double requireDouble(const std::string& section, const std::string& key) const;
  double getDouble(const std::string& section, const std::string& key, double fallback) const;
  int requireInt(const std::string& section, const std::string& key) const;
  int getInt(const std::string& section, const std::string& key, int fallback) const;
  std::uint64_t getU64(const std::string& section, const std::string& key,
                       std::uint64_t fallback) const;
  bool getBool(const std::string& section, const std::string& key, bool fallback) const;
  // whitespace-separated integers
  std::vector<int> getIntList(const std::string& section, const std::string& key,
                              const std::vector<int>& fallback) const;
  std::vector<std::string> getStringList(const std::string& section, const std::string& key,
                                         const std::vector<std::string>& fallback) const;

  // every present (section, key) must be declared; unknown entries are errors
  void validate(const std::map<std::string, std::set<std::string>>& schema) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::string origin_;
};

}  // namespace spinlab
