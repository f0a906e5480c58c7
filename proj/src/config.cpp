#include "lanesim/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace lanesim {
namespace {

const std::set<std::string> kAugmentKeys = {
    "seed",          "shift_range_m",      "yaw_range_deg",      "camera_weights",
    "label_source",  "label_kind",         "patch_kind",         "patch_w",
    "patch_h",       "ratio_w",            "ratio_h",            "roi_hfov_deg",
    "roi_ground_width_m", "min_patch_validity", "samples_per_frame",
};

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"world",
       {"seed", "road", "lane_width_m", "line_width_m", "dash_period_m", "dash_fill",
        "sample_step_m", "billboard_spacing_m", "billboard_offset_m"}},
      {"rig", {"side_offset_m"}},
      {"record",
       {"id", "frame_rate_hz", "speed_mps", "noise_sd_m", "dt_s", "start_s", "end_margin_m"}},
      {"augment", kAugmentKeys},
      {"train", {"lambda"}},
      {"resim",
       {"dt_s", "max_warp_offset_m", "max_warp_yaw_deg", "cooldown_m", "lookahead_time_s",
        "min_lookahead_m", "max_steering_rad", "max_steps", "wheelbase_m", "track_m"}},
      {"metrics", {"comfort_k"}},
      {"mapa", {"bias_frac", "max_warp_offset_m"}},
      // Per-model overrides of [augment] for the two-model story experiment.
      {"model_a", kAugmentKeys},
      {"model_b", kAugmentKeys},
  };
  return s;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::from_string(const std::string& text) {
  Config cfg;
  cfg.file_hash_ = fnv1a64(text.data(), text.size());
  cfg.hash_ = cfg.file_hash_;

  std::istringstream is(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (schema().find(section) == schema().end())
        throw ConfigError("config line " + std::to_string(lineno) + ": unknown section [" +
                          section + "]");
      cfg.values_[section];
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    const auto& allowed = schema().at(section);
    if (allowed.find(key) == allowed.end())
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key +
                        "' in [" + section + "]");
    if (cfg.values_[section].count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key +
                        "' in [" + section + "]");
    cfg.values_[section][key] = value;
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return from_string(buf.str());
}

void Config::override_seed(uint64_t seed) {
  seed_override_ = seed;
  hash_ = mix_seed(file_hash_, 0x5eed0153ull, seed);
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto sit = values_.find(section);
  return sit != values_.end() && sit->second.count(key) > 0;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  const auto sit = values_.find(section);
  if (sit == values_.end()) return fallback;
  const auto kit = sit->second.find(key);
  return kit == sit->second.end() ? fallback : kit->second;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get_string(section, key, "");
  size_t pos = 0;
  double out;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: [" + section + "] " + key + " = '" + v + "' is not a number");
  }
  if (pos != v.size())
    throw ConfigError("config: [" + section + "] " + key + " = '" + v + "' is not a number");
  return out;
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  const double v = get_double(section, key, static_cast<double>(fallback));
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError("config: [" + section + "] " + key + " must be an integer");
  return i;
}

uint64_t Config::get_u64(const std::string& section, const std::string& key,
                         uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get_string(section, key, "");
  try {
    size_t pos = 0;
    const uint64_t out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: [" + section + "] " + key + " = '" + v +
                      "' is not an unsigned integer");
  }
}

std::string Config::get_layered(const std::string& override_section,
                                const std::string& base_section, const std::string& key,
                                const std::string& fallback) const {
  if (has(override_section, key)) return get_string(override_section, key, fallback);
  return get_string(base_section, key, fallback);
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get_string(section, key, "");
  std::istringstream is(v);
  std::vector<double> out;
  double x;
  while (is >> x) out.push_back(x);
  if (!is.eof())
    throw ConfigError("config: [" + section + "] " + key + " must be a list of numbers");
  return out;
}

}  // namespace lanesim
