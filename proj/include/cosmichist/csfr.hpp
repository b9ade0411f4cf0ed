#pragma once

#include "cosmichist/background.hpp"
#include "cosmichist/structure.hpp"

#include <cstddef>
#include <vector>

namespace cosmichist {

//! Star-formation parameters. IMF is phi(m) ~ m^-(1+x) on [m_low, m_high].
struct SFParams {
  double x = 1.35;
  double tau = 2.5e9;
  double n = 1.0;
  double m_low = 0.1;
  double m_high = 140.0;
  double return_fraction = 0.0;

  //! Throws ParameterError naming the offending key.
  void validate() const;
};

//! A with integral of m * A m^-(1+x) dm over [m_low, m_high] equal to one.
double imf_normalization(const SFParams& sf);

//! rho_gas^n / (tau rho_gas_init^(n-1)), M_sun yr^-1 Mpc^-3.
double star_formation_rate(double rho_gas, const SFParams& sf, double rho_gas_init);

struct CSFRHistory {
  //! Ascending redshift grid; ts are the matching cosmic times (descending).
  std::vector<double> zs;
  std::vector<double> ts;
  std::vector<double> rho_gas;
  std::vector<double> csfr;
  double rho_gas_init = 0.0;
  //! Times the gas density went negative and was reset to zero.
  std::size_t floor_count = 0;
};

struct CsfrOptions {
  ToleranceSpec tol{};
  //! Number of intervals of the uniform output grid on [0, z_max].
  std::size_t samples = 2000;
};

/// Integrates the gas reservoir
///   d rho_g / dt = -(1 - R) rho_dot_star(rho_g) + a_b(t)
/// forward in time from z_max to z = 0, starting with all structure baryons as
/// gas. The ODE is solved in redshift (dt = -dz / ((1 + z) H)), segment by
/// segment between output grid points.
CSFRHistory run_csfr(const Background& background, const SFParams& sf, const StructureGrid& grid,
                     const CsfrOptions& options = {});

//! Monotone-cubic interpolation of the stored CSFR curve.
double csfr_at(const CSFRHistory& history, double z);

} // namespace cosmichist
