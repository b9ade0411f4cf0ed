#include "cosmichist/powerspec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace cosmichist {

namespace {

// Integration range in x = kR. Below 1e-7 the integrand falls as x^(3+ns);
// above 500 the window suppresses it as x^-4.
constexpr double kXMin = 1e-7;
constexpr double kXMax = 500.0;

} // namespace

double shape_parameter(const CosmologyParams& p) {
  return p.omega_m * p.h * std::exp(-p.omega_b * (1.0 + std::sqrt(2.0 * p.h) / p.omega_m));
}

double bbks_transfer(double q) {
  if (q <= 0.0)
    return 1.0;
  const double a = 2.34 * q;
  const double poly = 1.0 + 3.89 * q + std::pow(16.1 * q, 2) + std::pow(5.46 * q, 3) +
                      std::pow(6.71 * q, 4);
  return std::log1p(a) / a * std::pow(poly, -0.25);
}

double tophat_window(double x) {
  if (std::fabs(x) < 1e-3) {
    const double x2 = x * x;
    return 1.0 - x2 / 10.0 + x2 * x2 / 280.0;
  }
  return 3.0 * (std::sin(x) - x * std::cos(x)) / (x * x * x);
}

double lagrangian_radius(const CosmologyParams& params, double mass) {
  if (!(mass > 0.0))
    throw DomainError("mass must be > 0");
  return std::cbrt(3.0 * mass / (4.0 * std::numbers::pi * params.mean_matter_density()));
}

double mass_of_radius(const CosmologyParams& params, double radius) {
  if (!(radius > 0.0))
    throw DomainError("radius must be > 0");
  return 4.0 * std::numbers::pi / 3.0 * params.mean_matter_density() * radius * radius * radius;
}

PowerSpectrum::PowerSpectrum(const CosmologyParams& params, SpectrumOptions options)
    : params_(params), options_(std::move(options)) {
  options_.tol.validate();
  if (!(params_.sigma8 > 0.0))
    throw ParameterError({"sigma8"}, "sigma8 must be > 0");
  if (!std::isfinite(params_.ns))
    throw ParameterError({"ns"}, "ns must be finite");
  config_.ns = params_.ns;
  config_.sigma8 = params_.sigma8;
  config_.gamma = shape_parameter(params_);
  if (!(config_.gamma > 0.0))
    throw ParameterError({"omega_m", "omega_b", "h"}, "shape parameter Gamma must be > 0");
  config_.amplitude = 1.0;
  renormalize();
}

void PowerSpectrum::renormalize() {
  const double r8 = 8.0 / params_.h;
  const double var = variance_integral(r8, config_.amplitude);
  config_.amplitude *= config_.sigma8 * config_.sigma8 / var;
}

double PowerSpectrum::transfer(double k) const {
  if (!(k > 0.0))
    throw DomainError("wavenumber must be > 0");
  if (options_.transfer_override)
    return options_.transfer_override(k);
  return bbks_transfer(k / (config_.gamma * params_.h));
}

double PowerSpectrum::power(double k) const {
  const double t = transfer(k);
  return config_.amplitude * std::pow(k, config_.ns) * t * t;
}

double PowerSpectrum::variance_integral(double radius, double amplitude) const {
  const double ns = config_.ns;
  auto integrand = [&](double ln_x) {
    const double x = std::exp(ln_x);
    const double k = x / radius;
    const double t = transfer(k);
    const double w = tophat_window(x);
    return amplitude * std::pow(k, 3.0 + ns) * t * t * w * w;
  };
  const double integral = integrate(integrand, std::log(kXMin), std::log(kXMax), options_.tol);
  return integral / (2.0 * std::numbers::pi * std::numbers::pi);
}

double PowerSpectrum::sigma_of_R(double radius) const {
  if (!(radius > 0.0))
    throw DomainError("radius must be > 0");
  return std::sqrt(variance_integral(radius, config_.amplitude));
}

double PowerSpectrum::sigma_of_M(double mass) const {
  return sigma_of_R(lagrangian_radius(params_, mass));
}

SigmaTable::SigmaTable(const PowerSpectrum& spectrum, double log10_m_min, double log10_m_max,
                       std::size_t points)
    : rho_m0_(spectrum.params().mean_matter_density()) {
  if (!(log10_m_min < log10_m_max) || points < 4)
    throw std::invalid_argument("SigmaTable: need log10_m_min < log10_m_max and >= 4 points");
  log10_masses_ = linspace(log10_m_min, log10_m_max, points);
  mass_min_ = std::pow(10.0, log10_m_min);
  mass_max_ = std::pow(10.0, log10_m_max);

  std::vector<double> ln_m(points), ln_s(points);
  sigmas_.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double m = std::pow(10.0, log10_masses_[i]);
    sigmas_[i] = spectrum.sigma_of_M(m);
    ln_m[i] = log10_masses_[i] * std::numbers::ln10;
    ln_s[i] = std::log(sigmas_[i]);
  }
  ln_sigma_ = MonotoneCubic(Table1D(std::move(ln_m), std::move(ln_s)));

  slopes_.resize(points);
  for (std::size_t i = 0; i < points; ++i)
    slopes_[i] = dln_sigma_dln_M(std::pow(10.0, log10_masses_[i]));
}

void SigmaTable::check_mass(double mass) const {
  if (!(mass > 0.0))
    throw DomainError("mass must be > 0");
  const double x = std::log(mass);
  // Tolerate the rounding in pow(10, log10 M) at the grid ends.
  const double slack = 1e-12 * std::max(1.0, std::fabs(ln_sigma_.x_max()));
  if (x < ln_sigma_.x_min() - slack || x > ln_sigma_.x_max() + slack)
    throw RangeError(mass, mass_min_, mass_max_, "mass outside sigma table");
}

double SigmaTable::sigma(double mass) const {
  check_mass(mass);
  const double x = std::clamp(std::log(mass), ln_sigma_.x_min(), ln_sigma_.x_max());
  return std::exp(ln_sigma_(x));
}

double SigmaTable::dln_sigma_dln_M(double mass) const {
  check_mass(mass);
  constexpr double step = 1e-4;
  double lo = std::log(mass) - step;
  double hi = std::log(mass) + step;
  if (hi > ln_sigma_.x_max()) {
    lo -= hi - ln_sigma_.x_max();
    hi = ln_sigma_.x_max();
  }
  if (lo < ln_sigma_.x_min()) {
    hi += ln_sigma_.x_min() - lo;
    lo = ln_sigma_.x_min();
  }
  return (ln_sigma_(hi) - ln_sigma_(lo)) / (hi - lo);
}

} // namespace cosmichist
