#pragma once

#include "cosmichist/background.hpp"
#include "cosmichist/config.hpp"
#include "cosmichist/csfr.hpp"
#include "cosmichist/powerspec.hpp"
#include "cosmichist/structure.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cosmichist {

//! Process exit codes of the command-line tool.
enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_config = 2,
  exit_numerical = 3,
  exit_io = 4,
};

//! Every model object a run builds from a config, in dependency order.
struct Model {
  Background background;
  PowerSpectrum spectrum;
  SigmaTable sigma;
  PressSchechter press_schechter;

  static Model build(const RunConfig& config);
};

struct RunResult {
  std::vector<std::filesystem::path> files;
  std::filesystem::path manifest;
};

//! background.csv: z,t_yr,d_c_mpc,v_c_mpc3,growth,delta_c on samples+1 redshifts.
RunResult cmd_background(const RunConfig& config);

//! massfn_z<z>.csv: log10_m,dn_dm,n_above,sigma,dlnsigma_dlnm on mass_samples+1 masses.
RunResult cmd_massfn(const RunConfig& config, double z);

//! csfr.csv (z,t_yr,rho_gas,csfr) and csfr.svg.
RunResult cmd_csfr(const RunConfig& config);

//! File name written by cmd_massfn for redshift z.
std::string massfn_file_name(double z);

/// Command-line entry point:
///   cosmichist background|massfn|csfr [--config PATH] [--output DIR] [--<key> VALUE ...]
///   cosmichist verify MANIFEST
/// Returns one of ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace cosmichist
