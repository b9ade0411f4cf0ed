#pragma once

#include "cosmichist/background.hpp"
#include "cosmichist/csfr.hpp"
#include "cosmichist/structure.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cosmichist {

//! Invalid or unknown configuration input; keys() lists the keys involved.
class ConfigError : public std::invalid_argument {
public:
  ConfigError(std::vector<std::string> keys, const std::string& what)
      : std::invalid_argument(what), keys_(std::move(keys)) {}

  const std::vector<std::string>& keys() const noexcept { return keys_; }

private:
  std::vector<std::string> keys_;
};

//! Everything a pipeline run needs.
struct RunConfig {
  CosmologyParams cosmology{};
  SFParams star_formation{};
  MassBounds mass_bounds{};
  //! Intervals of the output redshift grid on [0, z_max].
  std::size_t samples = 2000;
  //! Intervals of the log10 mass grid written by massfn.
  std::size_t mass_samples = 120;
  //! Relative tolerance shared by every quadrature and the gas ODE.
  double rel_tol = 1e-8;
  std::filesystem::path output_dir = "output";

  //! Throws ConfigError naming the offending key(s) and the valid range.
  void validate() const;

  ToleranceSpec tolerance() const { return ToleranceSpec{rel_tol, 0.0, 50}; }
};

//! Canonical key order; used for the manifest echo.
const std::vector<std::string>& config_keys();

//! Value of key in the config, formatted for the manifest.
std::string config_value(const RunConfig& config, const std::string& key);

//! Sets one key from its textual value. Throws ConfigError.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

//! Closest known key by edit distance.
std::string nearest_key(const std::string& key);

/// Parses `key = value` lines; `#` starts a comment. Throws ConfigError on
/// syntax errors, duplicate or unknown keys.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

/// Builds a validated config. Precedence, lowest first: defaults, the
/// output-dir environment value, the config file, command-line flags.
RunConfig parse_config(const std::optional<std::filesystem::path>& file,
                       const std::vector<std::pair<std::string, std::string>>& flags,
                       const std::optional<std::string>& env_output_dir = std::nullopt);

} // namespace cosmichist
