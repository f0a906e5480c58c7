#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lanesim/common.hpp"

namespace lanesim {

// INI-style experiment config: [section] headers, key = value lines, # or ;
// comments. Every section and key is validated against the known schema at
// load time, so typos fail loudly instead of silently using a default.
class Config {
 public:
  static Config load(const std::filesystem::path& path);
  static Config from_string(const std::string& text);

  // FNV-1a of the config text, mixed with the seed override when present;
  // stamped into every artifact this config produces.
  uint64_t hash() const { return hash_; }
  void override_seed(uint64_t seed);
  std::optional<uint64_t> seed_override() const { return seed_override_; }

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  uint64_t get_u64(const std::string& section, const std::string& key, uint64_t fallback) const;

  // Layered lookup for the model-variant sections: [override_section] wins
  // over [base_section], then the fallback.
  std::string get_layered(const std::string& override_section, const std::string& base_section,
                          const std::string& key, const std::string& fallback) const;

  // Whitespace-separated doubles (e.g. camera weights).
  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
  uint64_t file_hash_ = 0;
  uint64_t hash_ = 0;
  std::optional<uint64_t> seed_override_;
};

}  // namespace lanesim
