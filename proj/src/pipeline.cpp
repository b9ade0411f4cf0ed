#include "cosmichist/pipeline.hpp"

#include "cosmichist/output.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>

#ifndef COSMICHIST_VERSION
#define COSMICHIST_VERSION "0.0.0"
#endif

namespace cosmichist {

namespace {

constexpr const char* kOutputEnv = "COSMICHIST_OUTPUT_DIR";

using Clock = std::chrono::steady_clock;

Background make_background(const RunConfig& config) {
  BackgroundOptions opts;
  opts.tol = config.tolerance();
  opts.dz = std::min(0.01, config.cosmology.z_max);
  return Background(config.cosmology, opts);
}

PowerSpectrum make_spectrum(const RunConfig& config) {
  SpectrumOptions opts;
  opts.tol = config.tolerance();
  return PowerSpectrum(config.cosmology, opts);
}

SigmaTable make_sigma(const RunConfig& config, const PowerSpectrum& spectrum) {
  const double lo = std::min(SigmaTable::default_log10_min, config.mass_bounds.log10_min);
  const double hi = std::max(SigmaTable::default_log10_max, config.mass_bounds.log10_max);
  return SigmaTable(spectrum, lo, hi, SigmaTable::default_points);
}

RunResult finish(const std::string& command, const RunConfig& config, OutputSet files,
                 Clock::time_point started) {
  ManifestRecord record;
  record.command = command;
  record.version = COSMICHIST_VERSION;
  for (const auto& key : config_keys())
    record.config.emplace_back(key, config_value(config, key));
  for (const auto& [name, content] : files.files())
    record.digests.emplace_back(name, "sha256:" + sha256_hex(content));
  record.wall_clock_seconds = std::chrono::duration<double>(Clock::now() - started).count();

  const std::string manifest_name = "manifest_" + command + ".txt";
  files.add(manifest_name, record.render());
  RunResult result;
  result.files = files.commit(config.output_dir);
  result.manifest = result.files.back();
  result.files.pop_back();
  return result;
}

} // namespace

Model Model::build(const RunConfig& config) {
  config.validate();
  Background background = make_background(config);
  PowerSpectrum spectrum = make_spectrum(config);
  SigmaTable sigma = make_sigma(config, spectrum);
  PressSchechter ps(background, sigma, config.mass_bounds, config.tolerance());
  return Model{std::move(background), std::move(spectrum), std::move(sigma), std::move(ps)};
}

RunResult cmd_background(const RunConfig& config) {
  const auto started = Clock::now();
  config.validate();
  const Background bg = make_background(config);

  CsvTable table({"z", "t_yr", "d_c_mpc", "v_c_mpc3", "growth", "delta_c"});
  for (double z : linspace(0.0, config.cosmology.z_max, config.samples + 1))
    table.add_row({z, bg.age(z), bg.comoving_distance(z), bg.comoving_volume(z), bg.growth(z),
                   bg.delta_c(z)});

  OutputSet files;
  files.add("background.csv", table.render());
  return finish("background", config, std::move(files), started);
}

std::string massfn_file_name(double z) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "massfn_z%g.csv", z);
  return buf;
}

RunResult cmd_massfn(const RunConfig& config, double z) {
  const auto started = Clock::now();
  config.validate();
  if (!(z >= 0.0 && z <= config.cosmology.z_max))
    throw ConfigError({"z"}, "z = " + format_sci(z) + " must lie in [0, z_max]");
  const Model model = Model::build(config);
  const auto& ps = model.press_schechter;

  CsvTable table({"log10_m", "dn_dm", "n_above", "sigma", "dlnsigma_dlnm"});
  for (double lm : linspace(config.mass_bounds.log10_min, config.mass_bounds.log10_max,
                            config.mass_samples + 1)) {
    const double m = std::pow(10.0, lm);
    const MassFunctionSample s = ps.sample(m, z);
    table.add_row({lm, s.dn_dM, s.n_above, model.sigma.sigma(m), model.sigma.dln_sigma_dln_M(m)});
  }

  OutputSet files;
  files.add(massfn_file_name(z), table.render());
  char tag[48];
  std::snprintf(tag, sizeof tag, "massfn_z%g", z);
  return finish(tag, config, std::move(files), started);
}

RunResult cmd_csfr(const RunConfig& config) {
  const auto started = Clock::now();
  const Model model = Model::build(config);
  const StructureGrid grid(model.press_schechter);
  const CSFRHistory history = run_csfr(model.background, config.star_formation, grid,
                                       CsfrOptions{config.tolerance(), config.samples});

  CsvTable table({"z", "t_yr", "rho_gas", "csfr"});
  for (std::size_t i = 0; i < history.zs.size(); ++i)
    table.add_row({history.zs[i], history.ts[i], history.rho_gas[i], history.csfr[i]});

  LinePlot plot;
  plot.title = "Cosmic star formation rate";
  plot.x_label = "redshift z";
  plot.y_label = "SFR density [M_sun / yr / Mpc^3]";
  plot.log_y = true;
  plot.xs = history.zs;
  plot.ys = history.csfr;

  OutputSet files;
  files.add("csfr.csv", table.render());
  files.add("csfr.svg", plot.render_svg());
  return finish("csfr", config, std::move(files), started);
}

// ---------------------------------------------------------------------------
// Command line

namespace {

std::string hyphenated(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

struct KeyFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* sub) {
    for (const auto& key : config_keys()) {
      if (key == "output_dir")
        continue;
      std::string names = "--" + hyphenated(key);
      if (key.find('_') != std::string::npos)
        names += ",--" + key;
      options[key] = sub->add_option(names, values[key], "override config key " + key);
    }
    options["output_dir"] =
        sub->add_option("-o,--output,--output-dir,--output_dir", values["output_dir"],
                        "output directory");
  }

  std::vector<std::pair<std::string, std::string>> given() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& key : config_keys()) {
      const auto it = options.find(key);
      if (it != options.end() && it->second->count() > 0)
        out.emplace_back(key, values.at(key));
    }
    return out;
  }
};

void reject_extras(const CLI::App* sub) {
  const auto extras = sub->remaining();
  if (extras.empty())
    return;
  std::string bad = extras.front();
  if (bad.rfind("--", 0) == 0) {
    std::string key = bad.substr(2);
    if (const auto eq = key.find('='); eq != std::string::npos)
      key.erase(eq);
    std::replace(key.begin(), key.end(), '-', '_');
    throw ConfigError({key},
                      "unknown option '" + bad + "' (did you mean '--" +
                          hyphenated(nearest_key(key)) + "'?)");
  }
  throw ConfigError({}, "unexpected argument '" + bad + "'");
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Flat LCDM background, Press-Schechter halos and the cosmic star formation rate",
               "cosmichist"};
  app.require_subcommand(1);
  // "--h" is the Hubble parameter, so help is long-form only.
  app.set_help_flag("--help", "print this help message and exit");
  app.set_version_flag("--version", std::string(COSMICHIST_VERSION));

  std::string config_path;
  KeyFlags bg_flags, mf_flags, csfr_flags;
  double massfn_z = 0.0;
  std::string manifest_path;

  auto* bg = app.add_subcommand("background", "time, distance, volume and growth tables");
  auto* mf = app.add_subcommand("massfn", "Press-Schechter mass function at one redshift");
  auto* cs = app.add_subcommand("csfr", "cosmic star formation rate history and plot");
  auto* vf = app.add_subcommand("verify", "re-check the digests listed in a run manifest");
  for (auto [sub, flags] : {std::pair{bg, &bg_flags}, {mf, &mf_flags}, {cs, &csfr_flags}}) {
    sub->add_option("-c,--config", config_path, "key = value config file");
    flags->attach(sub);
    sub->allow_extras();
  }
  mf->add_option("--z", massfn_z, "redshift")->required();
  vf->add_option("manifest", manifest_path, "manifest file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (vf->parsed()) {
      const auto problems = verify_manifest(manifest_path);
      for (const auto& p : problems)
        err << "verify: " << p << '\n';
      if (!problems.empty())
        return exit_failure;
      out << "verify: ok\n";
      return exit_ok;
    }

    const KeyFlags& flags = bg->parsed() ? bg_flags : mf->parsed() ? mf_flags : csfr_flags;
    const CLI::App* sub = bg->parsed() ? bg : mf->parsed() ? mf : cs;
    reject_extras(sub);

    std::optional<std::filesystem::path> file;
    if (!config_path.empty())
      file = config_path;
    std::optional<std::string> env_dir;
    if (const char* env = std::getenv(kOutputEnv))
      env_dir = env;
    const RunConfig config = parse_config(file, flags.given(), env_dir);

    RunResult result;
    if (bg->parsed())
      result = cmd_background(config);
    else if (mf->parsed())
      result = cmd_massfn(config, massfn_z);
    else
      result = cmd_csfr(config);
    for (const auto& f : result.files)
      out << "wrote " << f.generic_string() << '\n';
    out << "wrote " << result.manifest.generic_string() << '\n';
    return exit_ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return exit_io;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const RangeError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const DomainError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_failure;
  }
}

} // namespace cosmichist
