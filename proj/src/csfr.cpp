#include "cosmichist/csfr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace cosmichist {

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

} // namespace

void SFParams::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw ParameterError({"tau"}, "tau = " + num(tau) + " must be > 0 (years)");
  if (!(n > 0.0) || !std::isfinite(n))
    throw ParameterError({"n"}, "n = " + num(n) + " must be > 0");
  if (!std::isfinite(x))
    throw ParameterError({"x"}, "x must be finite");
  if (!(m_low > 0.0))
    throw ParameterError({"m_low"}, "m_low = " + num(m_low) + " must be > 0");
  if (!(m_high > m_low) || !std::isfinite(m_high))
    throw ParameterError({"m_low", "m_high"}, "m_high = " + num(m_high) +
                                                  " must be larger than m_low = " + num(m_low));
  if (!(return_fraction >= 0.0 && return_fraction < 1.0))
    throw ParameterError({"return_fraction"},
                         "return_fraction = " + num(return_fraction) + " must lie in [0, 1)");
}

double imf_normalization(const SFParams& sf) {
  sf.validate();
  const double p = 1.0 - sf.x;
  if (std::fabs(p) < 1e-12)
    return 1.0 / std::log(sf.m_high / sf.m_low);
  return p / (std::pow(sf.m_high, p) - std::pow(sf.m_low, p));
}

double star_formation_rate(double rho_gas, const SFParams& sf, double rho_gas_init) {
  if (!(rho_gas >= 0.0))
    throw DomainError("gas density must be >= 0");
  if (!(rho_gas_init > 0.0))
    throw DomainError("initial gas density must be > 0");
  if (sf.n == 1.0)
    return rho_gas / sf.tau;
  return std::pow(rho_gas, sf.n) / (sf.tau * std::pow(rho_gas_init, sf.n - 1.0));
}

CSFRHistory run_csfr(const Background& background, const SFParams& sf, const StructureGrid& grid,
                     const CsfrOptions& options) {
  sf.validate();
  options.tol.validate();
  if (options.samples < 2)
    throw std::invalid_argument("run_csfr: samples must be >= 2");
  const double z_max = background.z_max();
  if (std::fabs(grid.z_max() - z_max) > 1e-9 * z_max)
    throw std::invalid_argument("run_csfr: structure grid does not cover [0, z_max]");

  CSFRHistory h;
  h.zs = linspace(0.0, z_max, options.samples + 1);
  const std::size_t n = h.zs.size();
  h.ts.resize(n);
  h.rho_gas.resize(n);
  h.csfr.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    h.ts[i] = background.age(h.zs[i]);

  const double rho0 = grid.baryon_density(z_max);
  if (!(rho0 > 0.0))
    throw NumericalError("run_csfr: no baryons in structures at z_max = " + num(z_max));
  h.rho_gas_init = rho0;
  const double keep = 1.0 - sf.return_fraction;

  const OdeRhs rhs = [&](double z, double gas) {
    const double sfr = star_formation_rate(std::max(gas, 0.0), sf, rho0);
    const double dgas_dt = -keep * sfr + grid.accretion_rate(z);
    return -dgas_dt / ((1.0 + z) * background.hubble_rate_per_year(z));
  };

  double gas = rho0;
  h.rho_gas[n - 1] = gas;
  h.csfr[n - 1] = star_formation_rate(gas, sf, rho0);
  for (std::size_t i = n - 1; i-- > 0;) {
    try {
      gas = solve_ode_endpoint(rhs, gas, h.zs[i + 1], h.zs[i], options.tol);
    } catch (const OdeError& e) {
      throw OdeError(e.kind(), e.location(),
                     std::string("gas reservoir integration failed near z = ") +
                         num(e.location()) + ": " + e.what());
    }
    if (gas < 0.0) {
      gas = 0.0;
      ++h.floor_count;
    }
    h.rho_gas[i] = gas;
    h.csfr[i] = star_formation_rate(gas, sf, rho0);
  }
  return h;
}

double csfr_at(const CSFRHistory& history, double z) {
  if (history.zs.empty())
    throw std::invalid_argument("csfr_at: empty history");
  if (!(z >= history.zs.front() && z <= history.zs.back()))
    throw RangeError(z, history.zs.front(), history.zs.back(), "redshift outside CSFR history");
  return interp_monotone(Table1D(history.zs, history.csfr), z);
}

} // namespace cosmichist
