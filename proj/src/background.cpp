#include "cosmichist/background.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

namespace cosmichist {

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok)
    throw ParameterError({key}, key + " " + message);
}

} // namespace

void CosmologyParams::validate(bool allow_limiting_cases) const {
  for (auto [key, v] : {std::pair{"omega_m", omega_m}, {"omega_b", omega_b},
                        {"omega_lambda", omega_lambda}, {"h", h}, {"sigma8", sigma8},
                        {"ns", ns}, {"z_max", z_max}})
    require(std::isfinite(v), key, "must be finite");

  require(omega_b > 0.0, "omega_b", "= " + num(omega_b) + " must satisfy 0 < omega_b < omega_m");
  if (!(omega_b < omega_m))
    throw ParameterError({"omega_b", "omega_m"}, "omega_b = " + num(omega_b) +
                                                     " must be smaller than omega_m = " +
                                                     num(omega_m));
  if (allow_limiting_cases) {
    require(omega_m <= 1.0, "omega_m", "= " + num(omega_m) + " must lie in (0, 1]");
    require(omega_lambda >= 0.0 && omega_lambda < 1.0, "omega_lambda",
            "= " + num(omega_lambda) + " must lie in [0, 1)");
  } else {
    require(omega_m < 1.0, "omega_m", "= " + num(omega_m) + " must lie in (0, 1)");
    require(omega_lambda > 0.0 && omega_lambda < 1.0, "omega_lambda",
            "= " + num(omega_lambda) + " must lie in (0, 1)");
  }
  if (!(std::fabs(omega_m + omega_lambda - 1.0) <= 1e-8))
    throw ParameterError({"omega_m", "omega_lambda"},
                         "omega_m + omega_lambda = " + num(omega_m + omega_lambda) +
                             " but a flat universe requires |omega_m + omega_lambda - 1| <= 1e-8");
  require(h >= 0.4 && h <= 1.0, "h", "= " + num(h) + " must lie in [0.4, 1.0]");
  require(sigma8 > 0.0, "sigma8", "= " + num(sigma8) + " must be > 0");
  require(z_max > 0.0, "z_max", "= " + num(z_max) + " must be > 0");
}

CosmologyParams CosmologyParams::einstein_de_sitter(double h, double z_max) {
  CosmologyParams p;
  p.omega_m = 1.0;
  p.omega_b = 0.04;
  p.omega_lambda = 0.0;
  p.h = h;
  p.z_max = z_max;
  return p;
}

Background::Background(const CosmologyParams& params, const BackgroundOptions& options)
    : params_(params), options_(options) {
  params_.validate(options_.allow_limiting_cases);
  options_.tol.validate();
  if (!(options_.dz > 0.0) || options_.dz > params_.z_max)
    throw std::invalid_argument("Background: dz must lie in (0, z_max]");

  const auto n = static_cast<std::size_t>(std::ceil(params_.z_max / options_.dz - 1e-9)) + 1;
  table_.zs = linspace(0.0, params_.z_max, n);
  table_.ts.assign(n, 0.0);
  table_.dcs.assign(n, 0.0);
  table_.growths.assign(n, 0.0);

  const auto& tol = options_.tol;
  const auto& zs = table_.zs;
  auto age_integrand = [this](double z) { return 1.0 / ((1.0 + z) * hubble_E(z)); };
  auto dc_integrand = [this](double z) { return 1.0 / hubble_E(z); };
  auto growth_integrand = [this](double z) {
    const double e = hubble_E(z);
    return (1.0 + z) / (e * e * e);
  };

  // Tail integrals from z_max to infinity, then accumulate segment by segment.
  std::vector<double> age_int(n), growth_int(n);
  age_int[n - 1] = integrate_to_infinity(age_integrand, zs[n - 1], tol);
  growth_int[n - 1] = integrate_to_infinity(growth_integrand, zs[n - 1], tol);
  for (std::size_t i = n - 1; i-- > 0;) {
    age_int[i] = age_int[i + 1] + integrate(age_integrand, zs[i], zs[i + 1], tol);
    growth_int[i] = growth_int[i + 1] + integrate(growth_integrand, zs[i], zs[i + 1], tol);
  }
  double dc = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    dc += integrate(dc_integrand, zs[i - 1], zs[i], tol);
    table_.dcs[i] = dc * params_.hubble_distance_mpc();
  }

  growth_norm_ = 1.0 / (hubble_E(0.0) * growth_int[0]);
  for (std::size_t i = 0; i < n; ++i) {
    table_.ts[i] = age_int[i] * params_.hubble_time_yr();
    table_.growths[i] = growth_norm_ * hubble_E(zs[i]) * growth_int[i];
  }
  table_.growths[0] = 1.0;

  age_of_z_ = MonotoneCubic(Table1D(zs, table_.ts));
  dc_of_z_ = MonotoneCubic(Table1D(zs, table_.dcs));
  growth_of_z_ = MonotoneCubic(Table1D(zs, table_.growths));
}

void Background::check_redshift(double z) const {
  if (!(z >= 0.0))
    throw DomainError("redshift must be >= 0, got " + num(z));
}

double Background::hubble_E(double z) const {
  check_redshift(z);
  const double a = 1.0 + z;
  return std::sqrt(params_.omega_m * a * a * a + params_.omega_lambda);
}

double Background::hubble_rate_per_year(double z) const {
  return hubble_E(z) / params_.hubble_time_yr();
}

double Background::age_integral(double z) const {
  return integrate_to_infinity([this](double x) { return 1.0 / ((1.0 + x) * hubble_E(x)); }, z,
                               options_.tol);
}

double Background::growth_integral(double z) const {
  return integrate_to_infinity(
      [this](double x) {
        const double e = hubble_E(x);
        return (1.0 + x) / (e * e * e);
      },
      z, options_.tol);
}

double Background::age(double z) const {
  check_redshift(z);
  if (z <= params_.z_max)
    return age_of_z_(z);
  return age_direct(z);
}

double Background::age_direct(double z) const {
  check_redshift(z);
  return age_integral(z) * params_.hubble_time_yr();
}

double Background::z_of_t(double t) const { return age_of_z_.invert(t); }

double Background::comoving_distance(double z) const {
  check_redshift(z);
  if (z <= params_.z_max)
    return dc_of_z_(z);
  return comoving_distance_direct(z);
}

double Background::comoving_distance_direct(double z) const {
  check_redshift(z);
  if (z == 0.0)
    return 0.0;
  return integrate([this](double x) { return 1.0 / hubble_E(x); }, 0.0, z, options_.tol) *
         params_.hubble_distance_mpc();
}

double Background::comoving_volume(double z) const {
  const double dc = comoving_distance(z);
  return 4.0 * std::numbers::pi / 3.0 * dc * dc * dc;
}

double Background::comoving_volume_derivative(double z) const {
  const double dc = comoving_distance(z);
  return 4.0 * std::numbers::pi * dc * dc * params_.hubble_distance_mpc() / hubble_E(z);
}

double Background::matter_density(double z) const {
  check_redshift(z);
  const double a = 1.0 + z;
  return params_.mean_matter_density() * a * a * a;
}

double Background::baryon_density(double z) const {
  return matter_density(z) * (params_.omega_b / params_.omega_m);
}

double Background::growth(double z) const {
  check_redshift(z);
  if (z <= params_.z_max)
    return growth_of_z_(z);
  return growth_direct(z);
}

double Background::growth_direct(double z) const {
  check_redshift(z);
  return growth_norm_ * hubble_E(z) * growth_integral(z);
}

double Background::delta_c(double z) const { return constants::delta_c0 / growth(z); }

} // namespace cosmichist
