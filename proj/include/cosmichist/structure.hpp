#pragma once

#include "cosmichist/background.hpp"
#include "cosmichist/powerspec.hpp"

#include <vector>

namespace cosmichist {

struct MassFunctionSample {
  double mass = 0.0;
  double z = 0.0;
  //! Comoving halo number density per unit mass, Mpc^-3 M_sun^-1.
  double dn_dM = 0.0;
  //! Comoving number density above mass, Mpc^-3.
  double n_above = 0.0;
};

//! Halo mass range (log10 M_sun) over which halos host baryons.
struct MassBounds {
  double log10_min = 6.0;
  double log10_max = 18.0;
};

/// Press-Schechter halo abundance built on a background and a z = 0 sigma
/// table; sigma(M, z) = sigma(M) D(z) enters through delta_c(z) = 1.686 / D(z).
class PressSchechter {
public:
  PressSchechter(Background background, SigmaTable sigma, MassBounds bounds = {},
                 ToleranceSpec tol = {});

  const Background& background() const noexcept { return background_; }
  const SigmaTable& sigma_table() const noexcept { return sigma_; }
  const MassBounds& bounds() const noexcept { return bounds_; }
  double mass_min() const noexcept { return m_min_; }
  double mass_max() const noexcept { return m_max_; }
  double mean_matter_density() const noexcept { return rho_m0_; }

  //! dn/dM at (M, z), Mpc^-3 M_sun^-1.
  double mass_function(double mass, double z) const;
  //! n(>M) integrated up to the configured upper bound; zero at or above it.
  double number_density_above(double mass, double z) const;
  MassFunctionSample sample(double mass, double z) const;

  //! Closed form erfc(delta_c(z) / (sqrt 2 sigma(M_min))).
  double collapsed_fraction(double z, double m_min) const;
  //! (1/rho_m0) * integral of M dn/dM over [m_lo, m_hi].
  double collapsed_fraction_integral(double z, double m_lo, double m_hi) const;

  //! Comoving baryon density in halos within the configured bounds, M_sun Mpc^-3.
  double baryon_density_in_structures(double z) const;

private:
  void check_z(double z) const;

  Background background_;
  SigmaTable sigma_;
  MassBounds bounds_;
  ToleranceSpec tol_;
  double m_min_;
  double m_max_;
  double rho_m0_;
};

/// Baryons locked in halos, tabulated on the background redshift grid, and the
/// accretion rate derived from the splined table.
class StructureGrid {
public:
  explicit StructureGrid(const PressSchechter& ps);

  double log10_m_min() const noexcept { return bounds_.log10_min; }
  double log10_m_max() const noexcept { return bounds_.log10_max; }
  const std::vector<double>& zs() const noexcept { return zs_; }
  const std::vector<double>& rho_b_struct() const noexcept { return rho_b_; }
  //! Accretion rate at every grid redshift (endpoints included), M_sun yr^-1 Mpc^-3.
  const std::vector<double>& a_b() const noexcept { return a_b_; }
  double z_max() const noexcept { return zs_.back(); }

  //! Interpolated rho_b_struct(z) on [0, z_max].
  double baryon_density(double z) const;
  //! d rho_b / dz of the interpolant.
  double baryon_density_slope(double z) const;

  /// max(0, d rho_b / dt) on the open interval (0, z_max); the grid endpoints
  /// raise RangeError.
  double baryon_accretion_rate(double z) const;
  //! Same quantity on the closed interval [0, z_max]; used to drive the gas ODE.
  double accretion_rate(double z) const;

  //! Number of grid points where the raw derivative was negative and clamped.
  std::size_t clamped_points() const noexcept { return clamped_; }

private:
  Background background_;
  MassBounds bounds_;
  std::vector<double> zs_;
  std::vector<double> rho_b_;
  std::vector<double> a_b_;
  bool log_interp_ = true;
  MonotoneCubic interp_;
  std::size_t clamped_ = 0;
};

} // namespace cosmichist
