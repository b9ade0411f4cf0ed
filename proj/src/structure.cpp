#include "cosmichist/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cosmichist {

PressSchechter::PressSchechter(Background background, SigmaTable sigma, MassBounds bounds,
                               ToleranceSpec tol)
    : background_(std::move(background)), sigma_(std::move(sigma)), bounds_(bounds), tol_(tol),
      m_min_(std::pow(10.0, bounds.log10_min)), m_max_(std::pow(10.0, bounds.log10_max)),
      rho_m0_(background_.params().mean_matter_density()) {
  tol_.validate();
  if (!(bounds_.log10_min < bounds_.log10_max))
    throw ParameterError({"mass_min", "mass_max"}, "mass_min must be smaller than mass_max");
  const double lo = sigma_.log10_masses().front();
  const double hi = sigma_.log10_masses().back();
  if (bounds_.log10_min < lo || bounds_.log10_max > hi)
    throw ParameterError({"mass_min", "mass_max"}, "mass bounds must lie inside the sigma table");
}

void PressSchechter::check_z(double z) const {
  if (!(z >= 0.0 && z <= background_.z_max()))
    throw RangeError(z, 0.0, background_.z_max(), "redshift outside [0, z_max]");
}

double PressSchechter::mass_function(double mass, double z) const {
  check_z(z);
  const double sigma = sigma_.sigma(mass);
  const double slope = sigma_.dln_sigma_dln_M(mass);
  const double nu = background_.delta_c(z) / sigma;
  return std::sqrt(2.0 / std::numbers::pi) * rho_m0_ / (mass * mass) * nu * std::fabs(slope) *
         std::exp(-0.5 * nu * nu);
}

double PressSchechter::number_density_above(double mass, double z) const {
  check_z(z);
  sigma_.sigma(mass); // range check
  if (mass >= m_max_)
    return 0.0;
  return integrate(
      [&](double ln_m) {
        const double m = std::exp(ln_m);
        return m * mass_function(m, z);
      },
      std::log(mass), std::log(m_max_), tol_);
}

MassFunctionSample PressSchechter::sample(double mass, double z) const {
  return {mass, z, mass_function(mass, z), number_density_above(mass, z)};
}

double PressSchechter::collapsed_fraction(double z, double m_min) const {
  check_z(z);
  return std::erfc(background_.delta_c(z) / (std::numbers::sqrt2 * sigma_.sigma(m_min)));
}

double PressSchechter::collapsed_fraction_integral(double z, double m_lo, double m_hi) const {
  check_z(z);
  sigma_.sigma(m_lo);
  sigma_.sigma(m_hi);
  if (!(m_lo < m_hi))
    throw std::invalid_argument("collapsed_fraction_integral: need m_lo < m_hi");
  const double integral = integrate(
      [&](double ln_m) {
        const double m = std::exp(ln_m);
        return m * m * mass_function(m, z);
      },
      std::log(m_lo), std::log(m_hi), tol_);
  return integral / rho_m0_;
}

double PressSchechter::baryon_density_in_structures(double z) const {
  const auto& p = background_.params();
  return p.omega_b / p.omega_m * rho_m0_ * collapsed_fraction_integral(z, m_min_, m_max_);
}

StructureGrid::StructureGrid(const PressSchechter& ps)
    : background_(ps.background()), bounds_(ps.bounds()), zs_(ps.background().epochs().zs) {
  const std::size_t n = zs_.size();
  rho_b_.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    rho_b_[i] = ps.baryon_density_in_structures(zs_[i]);

  log_interp_ = std::all_of(rho_b_.begin(), rho_b_.end(), [](double v) { return v > 0.0; });
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i)
    ys[i] = log_interp_ ? std::log(rho_b_[i]) : rho_b_[i];
  interp_ = MonotoneCubic(Table1D(zs_, std::move(ys)));

  a_b_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = zs_[i];
    const double raw = -baryon_density_slope(z) * (1.0 + z) * background_.hubble_rate_per_year(z);
    if (raw < 0.0)
      ++clamped_;
    a_b_[i] = std::max(0.0, raw);
  }
}

double StructureGrid::baryon_density(double z) const {
  const double v = interp_(z);
  return log_interp_ ? std::exp(v) : v;
}

double StructureGrid::baryon_density_slope(double z) const {
  const double d = interp_.derivative(z);
  return log_interp_ ? std::exp(interp_(z)) * d : d;
}

double StructureGrid::accretion_rate(double z) const {
  if (!(z >= 0.0 && z <= z_max()))
    throw RangeError(z, 0.0, z_max(), "accretion rate requested outside [0, z_max]");
  // dz/dt = -(1 + z) H(z)
  const double rate = -baryon_density_slope(z) * (1.0 + z) * background_.hubble_rate_per_year(z);
  return std::max(0.0, rate);
}

double StructureGrid::baryon_accretion_rate(double z) const {
  if (!(z > 0.0 && z < z_max()))
    throw RangeError(z, 0.0, z_max(), "accretion rate needs z strictly inside (0, z_max)");
  return accretion_rate(z);
}

} // namespace cosmichist
