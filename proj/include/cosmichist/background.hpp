#pragma once

#include "cosmichist/numerics.hpp"

#include <vector>

namespace cosmichist {

namespace constants {
inline constexpr double speed_of_light_km_s = 2.99792458e5;
//! Hubble time 1/H0 in years for h = 1.
inline constexpr double hubble_time_yr = 9.77814e9;
//! Critical density today for h = 1, M_sun Mpc^-3.
inline constexpr double critical_density = 2.77536627e11;
//! Linear spherical-collapse threshold at D = 1.
inline constexpr double delta_c0 = 1.686;
} // namespace constants

//! Flat LCDM parameter record. Radiation is neglected.
struct CosmologyParams {
  double omega_m = 0.24;
  double omega_b = 0.04;
  double omega_lambda = 0.76;
  double h = 0.73;
  double sigma8 = 0.76;
  double ns = 1.0;
  double z_max = 20.0;

  /// Throws std::invalid_argument naming the offending field(s).
  ///
  /// With allow_limiting_cases the open bounds on omega_m and omega_lambda
  /// become closed, which admits the Einstein-de Sitter test universe
  /// (omega_m = 1, omega_lambda = 0). Flatness is always enforced.
  void validate(bool allow_limiting_cases = false) const;

  //! Omega_m = 1, Omega_Lambda = 0 with the given h; used as an analytic check.
  static CosmologyParams einstein_de_sitter(double h = 1.0, double z_max = 20.0);

  double hubble_time_yr() const { return constants::hubble_time_yr / h; }
  double hubble_distance_mpc() const { return constants::speed_of_light_km_s / (100.0 * h); }
  double critical_density() const { return constants::critical_density * h * h; }
  double mean_matter_density() const { return omega_m * critical_density(); }
};

struct BackgroundOptions {
  ToleranceSpec tol{};
  double dz = 0.01;
  bool allow_limiting_cases = false;
};

//! Tabulated epoch quantities on a uniform redshift grid.
struct EpochTable {
  std::vector<double> zs;
  std::vector<double> ts;
  std::vector<double> dcs;
  std::vector<double> growths;
};

/// Flat LCDM background. Builds an EpochTable on construction; age, distance
/// and growth lookups inside [0, z_max] interpolate that table, outside it they
/// fall back to direct quadrature. The *_direct members always integrate.
class Background {
public:
  explicit Background(const CosmologyParams& params, const BackgroundOptions& options = {});

  const CosmologyParams& params() const noexcept { return params_; }
  const EpochTable& epochs() const noexcept { return table_; }
  const ToleranceSpec& tolerance() const noexcept { return options_.tol; }
  double z_max() const noexcept { return params_.z_max; }

  //! E(z) = H(z)/H0.
  double hubble_E(double z) const;
  //! H(z) in yr^-1.
  double hubble_rate_per_year(double z) const;

  //! Cosmic time at redshift z, years.
  double age(double z) const;
  double age_direct(double z) const;
  //! Redshift at cosmic time t (years); inverse of age on the epoch table.
  double z_of_t(double t) const;

  //! Line-of-sight comoving distance, Mpc.
  double comoving_distance(double z) const;
  double comoving_distance_direct(double z) const;
  //! All-sky comoving volume out to z, Mpc^3.
  double comoving_volume(double z) const;
  //! dV/dz, all sky, Mpc^3.
  double comoving_volume_derivative(double z) const;

  //! Mean matter density at z (physical), M_sun Mpc^-3.
  double matter_density(double z) const;
  double baryon_density(double z) const;

  //! Linear growth factor normalised to D(0) = 1.
  double growth(double z) const;
  double growth_direct(double z) const;
  //! Linearly extrapolated collapse threshold 1.686 / D(z).
  double delta_c(double z) const;

private:
  void check_redshift(double z) const;
  double age_integral(double z) const;
  double growth_integral(double z) const;

  CosmologyParams params_;
  BackgroundOptions options_;
  EpochTable table_;
  double growth_norm_ = 1.0;
  MonotoneCubic age_of_z_;
  MonotoneCubic dc_of_z_;
  MonotoneCubic growth_of_z_;
};

} // namespace cosmichist
