// Per-run provenance record written beside every CLI subcommand's
// outputs: resolved config, input digests, output paths, seeds,
// wall-clock.
#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridrec/errors.hpp"

namespace hybridrec {

inline std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot hash missing file: " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!in) break;
  }
  return h;
}

inline std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

class RunManifest {
 public:
  explicit RunManifest(std::string subcommand)
      : subcommand_(std::move(subcommand)),
        start_(std::chrono::steady_clock::now()) {}

  void set_config(const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) config_[k] = v;
  }
  void set_option(const std::string& key, const std::string& value) {
    config_[key] = value;
  }
  void add_input(const std::string& path) {
    inputs_[path] = hex_digest(fnv1a64_file(path));
  }
  void add_output(const std::string& path) { outputs_.push_back(path); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  void write(const std::string& path) const {
    nlohmann::json j;
    j["subcommand"] = subcommand_;
    j["config"] = config_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    j["seed"] = seed_;
    j["wall_clock_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start_)
            .count();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
  }

 private:
  std::string subcommand_;
  std::map<std::string, std::string> config_;
  std::map<std::string, std::string> inputs_;
  std::vector<std::string> outputs_;
  std::uint64_t seed_ = 0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace hybridrec
