// Key-value config files: `key = value` lines, '#' comments, blank
// lines ignored. Used by the synth generator, the evaluation suite and
// the pipeline command.
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hybridrec/errors.hpp"
#include "hybridrec/strings.hpp"

namespace hybridrec {

class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open config file: " + path);
    KeyValueConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string stripped = trim(line);
      if (stripped.empty() || stripped[0] == '#') continue;
      std::size_t eq = stripped.find('=');
      if (eq == std::string::npos)
        throw ConfigInvalid("line " + std::to_string(lineno) +
                            ": expected key = value");
      cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key,
                         const std::string& fallback = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
      throw ConfigInvalid("missing required config key: " + key);
    return it->second;
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return parse_int(key, it->second);
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      return std::stoull(it->second);
    } catch (const std::exception&) {
      throw ConfigInvalid("key " + key + ": not an unsigned integer: " +
                          it->second);
    }
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw ConfigInvalid("key " + key + ": not a number: " + it->second);
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigInvalid("key " + key + ": not a boolean: " + v);
  }

  std::vector<std::string> get_list(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || trim(it->second).empty()) return {};
    std::vector<std::string> out;
    for (const auto& part : split(it->second, ',')) {
      std::string t = trim(part);
      if (!t.empty()) out.push_back(t);
    }
    return out;
  }

  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : get_list(key)) {
      try {
        out.push_back(std::stod(s));
      } catch (const std::exception&) {
        throw ConfigInvalid("key " + key + ": not a number: " + s);
      }
    }
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::int64_t parse_int(const std::string& key,
                                const std::string& value) {
    try {
      std::size_t pos = 0;
      std::int64_t v = std::stoll(value, &pos);
      if (pos != value.size()) throw std::invalid_argument(value);
      return v;
    } catch (const std::exception&) {
      throw ConfigInvalid("key " + key + ": not an integer: " + value);
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace hybridrec
