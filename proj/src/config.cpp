#include "cosmichist/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace cosmichist {

namespace {

struct KeySpec {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string format_real(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

double parse_real(const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (text.empty() || end != begin + text.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigError({key}, key + ": '" + text + "' is not a finite number");
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(begin, &end, 10);
  if (text.empty() || end != begin + text.size() || errno == ERANGE || v < 0)
    throw ConfigError({key}, key + ": '" + text + "' is not a non-negative integer");
  return static_cast<std::size_t>(v);
}

KeySpec real_key(std::string name, double RunConfig::*field) {
  return {name, [name, field](RunConfig& c, const std::string& v) { c.*field = parse_real(name, v); },
          [field](const RunConfig& c) { return format_real(c.*field); }};
}

template <class Sub>
KeySpec nested_real(std::string name, Sub RunConfig::*sub, double Sub::*field) {
  return {name,
          [name, sub, field](RunConfig& c, const std::string& v) {
            (c.*sub).*field = parse_real(name, v);
          },
          [sub, field](const RunConfig& c) { return format_real((c.*sub).*field); }};
}

KeySpec count_key(std::string name, std::size_t RunConfig::*field) {
  return {name,
          [name, field](RunConfig& c, const std::string& v) { c.*field = parse_count(name, v); },
          [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

const std::vector<KeySpec>& registry() {
  static const std::vector<KeySpec> keys = {
      nested_real("omega_m", &RunConfig::cosmology, &CosmologyParams::omega_m),
      nested_real("omega_b", &RunConfig::cosmology, &CosmologyParams::omega_b),
      nested_real("omega_lambda", &RunConfig::cosmology, &CosmologyParams::omega_lambda),
      nested_real("h", &RunConfig::cosmology, &CosmologyParams::h),
      nested_real("sigma8", &RunConfig::cosmology, &CosmologyParams::sigma8),
      nested_real("ns", &RunConfig::cosmology, &CosmologyParams::ns),
      nested_real("z_max", &RunConfig::cosmology, &CosmologyParams::z_max),
      nested_real("x", &RunConfig::star_formation, &SFParams::x),
      nested_real("tau", &RunConfig::star_formation, &SFParams::tau),
      nested_real("n", &RunConfig::star_formation, &SFParams::n),
      nested_real("m_low", &RunConfig::star_formation, &SFParams::m_low),
      nested_real("m_high", &RunConfig::star_formation, &SFParams::m_high),
      nested_real("return_fraction", &RunConfig::star_formation, &SFParams::return_fraction),
      nested_real("mass_min", &RunConfig::mass_bounds, &MassBounds::log10_min),
      nested_real("mass_max", &RunConfig::mass_bounds, &MassBounds::log10_max),
      count_key("samples", &RunConfig::samples),
      count_key("mass_samples", &RunConfig::mass_samples),
      real_key("rel_tol", &RunConfig::rel_tol),
      {"output_dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
       [](const RunConfig& c) { return c.output_dir.generic_string(); }},
  };
  return keys;
}

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : registry())
    if (k.name == key)
      return &k;
  return nullptr;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j)
    prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Valid ranges quoted back to the user when a record fails validation.
const char* valid_range(const std::string& key) {
  static const std::vector<std::pair<std::string, const char*>> ranges = {
      {"omega_m", "0 < omega_b < omega_m < 1 and omega_m + omega_lambda = 1"},
      {"omega_b", "0 < omega_b < omega_m"},
      {"omega_lambda", "0 < omega_lambda < 1 and omega_m + omega_lambda = 1"},
      {"h", "[0.4, 1.0]"},
      {"sigma8", "> 0"},
      {"ns", "finite"},
      {"z_max", "> 0"},
      {"x", "finite"},
      {"tau", "> 0 years"},
      {"n", "> 0"},
      {"m_low", "0 < m_low < m_high"},
      {"m_high", "m_high > m_low"},
      {"return_fraction", "[0, 1)"},
  };
  for (const auto& [k, r] : ranges)
    if (k == key)
      return r;
  return "";
}

} // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& k : registry())
      out.push_back(k.name);
    return out;
  }();
  return names;
}

std::string config_value(const RunConfig& config, const std::string& key) {
  const KeySpec* spec = find_key(key);
  if (!spec)
    throw ConfigError({key}, "unknown key '" + key + "'");
  return spec->get(config);
}

std::string nearest_key(const std::string& key) {
  std::string best;
  std::size_t best_d = static_cast<std::size_t>(-1);
  for (const auto& k : registry()) {
    const std::size_t d = edit_distance(key, k.name);
    if (d < best_d) {
      best_d = d;
      best = k.name;
    }
  }
  return best;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (!spec)
    throw ConfigError({key},
                      "unknown key '" + key + "' (did you mean '" + nearest_key(key) + "'?)");
  spec->set(config, value);
}

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError({}, "config line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError({}, "config line " + std::to_string(lineno) + ": missing key");
    if (!find_key(key))
      throw ConfigError({key}, "config line " + std::to_string(lineno) + ": unknown key '" + key +
                                   "' (did you mean '" + nearest_key(key) + "'?)");
    if (!seen.insert(key).second)
      throw ConfigError({key},
                        "config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

void RunConfig::validate() const {
  try {
    cosmology.validate();
    star_formation.validate();
  } catch (const ParameterError& e) {
    std::string msg = e.what();
    for (const auto& k : e.keys())
      msg += "; valid " + k + ": " + valid_range(k);
    throw ConfigError(e.keys(), msg);
  }
  if (!(mass_bounds.log10_min >= 2.0 && mass_bounds.log10_max <= 20.0 &&
        mass_bounds.log10_min < mass_bounds.log10_max))
    throw ConfigError({"mass_min", "mass_max"},
                      "mass_min = " + format_real(mass_bounds.log10_min) + ", mass_max = " +
                          format_real(mass_bounds.log10_max) +
                          "; valid: 2 <= mass_min < mass_max <= 20 (log10 M_sun)");
  if (samples < 2 || samples > 1'000'000)
    throw ConfigError({"samples"}, "samples = " + std::to_string(samples) +
                                       "; valid: integer in [2, 1000000]");
  if (mass_samples < 2 || mass_samples > 100'000)
    throw ConfigError({"mass_samples"}, "mass_samples = " + std::to_string(mass_samples) +
                                            "; valid: integer in [2, 100000]");
  if (!(rel_tol > 0.0 && rel_tol <= 1e-3))
    throw ConfigError({"rel_tol"}, "rel_tol = " + format_real(rel_tol) + "; valid: (0, 1e-3]");
  if (output_dir.empty())
    throw ConfigError({"output_dir"}, "output_dir must not be empty");
}

RunConfig parse_config(const std::optional<std::filesystem::path>& file,
                       const std::vector<std::pair<std::string, std::string>>& flags,
                       const std::optional<std::string>& env_output_dir) {
  RunConfig config;
  if (env_output_dir && !env_output_dir->empty())
    config.output_dir = *env_output_dir;
  if (file) {
    std::ifstream in(*file);
    if (!in)
      throw ConfigError({}, "cannot read config file " + file->string());
    std::stringstream buf;
    buf << in.rdbuf();
    for (const auto& [k, v] : parse_config_text(buf.str()))
      set_config_value(config, k, v);
  }
  for (const auto& [k, v] : flags)
    set_config_value(config, k, v);
  config.validate();
  return config;
}

} // namespace cosmichist
