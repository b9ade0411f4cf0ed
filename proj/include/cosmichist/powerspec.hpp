#pragma once

#include "cosmichist/background.hpp"
#include "cosmichist/numerics.hpp"

#include <functional>
#include <vector>

namespace cosmichist {

//! Normalised linear spectrum P(k) = amplitude * k^ns * T(k)^2, k in Mpc^-1.
struct SpectrumConfig {
  double ns = 1.0;
  double sigma8 = 0.76;
  double gamma = 0.0;
  double amplitude = 0.0;
};

struct SpectrumOptions {
  ToleranceSpec tol{};
  //! Replaces the BBKS transfer function when set (e.g. T = 1 for scale-free checks).
  std::function<double(double)> transfer_override{};
};

//! Shape parameter with the baryon correction, Gamma = Om h exp(-Ob (1 + sqrt(2h)/Om)).
double shape_parameter(const CosmologyParams& params);

//! BBKS fit as a function of q = k / (Gamma h).
double bbks_transfer(double q);

//! Top-hat window in Fourier space, 3 (sin x - x cos x) / x^3.
double tophat_window(double x);

//! Lagrangian radius (Mpc) enclosing mass M (M_sun) at the mean matter density today.
double lagrangian_radius(const CosmologyParams& params, double mass);
double mass_of_radius(const CosmologyParams& params, double radius);

/// Linear matter power spectrum with a BBKS transfer function, normalised so
/// that the top-hat variance at R = 8/h Mpc equals sigma8.
class PowerSpectrum {
public:
  explicit PowerSpectrum(const CosmologyParams& params, SpectrumOptions options = {});

  const SpectrumConfig& config() const noexcept { return config_; }
  const CosmologyParams& params() const noexcept { return params_; }
  const ToleranceSpec& tolerance() const noexcept { return options_.tol; }

  double transfer(double k) const;
  double power(double k) const;

  //! Linear rms fluctuation at z = 0 in a top-hat sphere of radius R (Mpc).
  double sigma_of_R(double radius) const;
  double sigma_of_M(double mass) const;

  //! Re-runs the sigma8 normalisation on the current amplitude.
  void renormalize();

private:
  double variance_integral(double radius, double amplitude) const;

  CosmologyParams params_;
  SpectrumOptions options_;
  SpectrumConfig config_;
};

/// sigma(M) at z = 0 tabulated on a uniform log10 M grid, with its
/// logarithmic slope. Lookups interpolate ln sigma against ln M.
class SigmaTable {
public:
  static constexpr double default_log10_min = 4.0;
  static constexpr double default_log10_max = 18.0;
  static constexpr std::size_t default_points = 512;

  explicit SigmaTable(const PowerSpectrum& spectrum, double log10_m_min = default_log10_min,
                      double log10_m_max = default_log10_max,
                      std::size_t points = default_points);

  double sigma(double mass) const;
  //! Central difference of ln sigma in ln M with relative step 1e-4 on the interpolant.
  double dln_sigma_dln_M(double mass) const;

  double mass_min() const noexcept { return mass_min_; }
  double mass_max() const noexcept { return mass_max_; }
  const std::vector<double>& log10_masses() const noexcept { return log10_masses_; }
  const std::vector<double>& sigmas() const noexcept { return sigmas_; }
  const std::vector<double>& slopes() const noexcept { return slopes_; }
  double mean_matter_density() const noexcept { return rho_m0_; }

private:
  void check_mass(double mass) const;

  std::vector<double> log10_masses_;
  std::vector<double> sigmas_;
  std::vector<double> slopes_;
  MonotoneCubic ln_sigma_;
  double mass_min_ = 0.0;
  double mass_max_ = 0.0;
  double rho_m0_ = 0.0;
};

} // namespace cosmichist
