#include <doctest.h>

#include "cosmichist/config.hpp"
#include "cosmichist/output.hpp"
#include "cosmichist/pipeline.hpp"
#include "oracles.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <sys/wait.h>

using namespace cosmichist;
namespace fs = std::filesystem;
using doctest::Approx;

namespace {

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');)
    cells.push_back(cell);
  return cells;
}

struct Csv {
  std::string header;
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<std::string>> cells;
};

Csv read_csv(const fs::path& p) {
  const auto lines = lines_of(oracle::slurp(p));
  Csv csv;
  csv.header = lines.at(0);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    csv.cells.push_back(split(lines[i]));
    std::vector<double> row;
    for (const auto& c : csv.cells.back())
      row.push_back(std::strtod(c.c_str(), nullptr));
    csv.rows.push_back(row);
  }
  return csv;
}

struct Cli {
  int code = -1;
  std::string out;
  std::string err;
};

Cli cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cosmichist");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  Cli r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

RunConfig config_in(const fs::path& dir) {
  RunConfig c;
  c.output_dir = dir;
  return c;
}

} // namespace

TEST_CASE("config text parsing") {
  const auto kv = parse_config_text("# comment\n\n  tau = 1e9  # trailing\nh=0.7\n");
  REQUIRE(kv.size() == 2);
  CHECK(kv[0] == std::pair<std::string, std::string>{"tau", "1e9"});
  CHECK(kv[1] == std::pair<std::string, std::string>{"h", "0.7"});
  CHECK(parse_config_text("").empty());

  CHECK_THROWS_AS(parse_config_text("tau 1e9\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("tau = 1\ntau = 2\n"), ConfigError);
  try {
    parse_config_text("tua = 1e9\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("tau") != std::string::npos);
    CHECK(e.keys() == std::vector<std::string>{"tua"});
  }
}

TEST_CASE("key registry") {
  const auto& keys = config_keys();
  CHECK(keys.front() == "omega_m");
  CHECK(keys.back() == "output_dir");
  CHECK(std::find(keys.begin(), keys.end(), "mass_min") != keys.end());
  CHECK(nearest_key("tua") == "tau");
  CHECK(nearest_key("omega-m") == "omega_m");
  CHECK(nearest_key("sigma_8") == "sigma8");

  RunConfig c;
  set_config_value(c, "tau", "1e9");
  CHECK(c.star_formation.tau == 1e9);
  set_config_value(c, "samples", "100");
  CHECK(c.samples == 100);
  CHECK_THROWS_AS(set_config_value(c, "tau", "fast"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "samples", "-3"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "nope", "1"), ConfigError);
  CHECK(config_value(RunConfig{}, "omega_m") == format_sci(0.24));
}

TEST_CASE("parse_config defaults and precedence") {
  const fs::path dir = oracle::temp_dir("cfg");
  const fs::path empty = dir / "empty.ini";
  write_file(empty, "");
  const RunConfig d = parse_config(empty, {});
  CHECK(d.cosmology.omega_m == 0.24);
  CHECK(d.cosmology.omega_b == 0.04);
  CHECK(d.cosmology.omega_lambda == 0.76);
  CHECK(d.cosmology.h == 0.73);
  CHECK(d.cosmology.sigma8 == 0.76);
  CHECK(d.cosmology.ns == 1.0);
  CHECK(d.cosmology.z_max == 20.0);
  CHECK(d.star_formation.x == 1.35);
  CHECK(d.star_formation.tau == 2.5e9);
  CHECK(d.star_formation.n == 1.0);
  CHECK(d.mass_bounds.log10_min == 6.0);
  CHECK(d.mass_bounds.log10_max == 18.0);

  const fs::path file = dir / "run.ini";
  write_file(file, "tau = 2.5e9\noutput_dir = from_file\n");
  CHECK(parse_config(file, {{"tau", "1.0e9"}}).star_formation.tau == 1.0e9);
  CHECK(parse_config(file, {}).star_formation.tau == 2.5e9);
  CHECK(parse_config(file, {}, std::string("from_env")).output_dir == "from_file");
  CHECK(parse_config(empty, {}, std::string("from_env")).output_dir == "from_env");
  CHECK(parse_config(file, {{"output_dir", "from_flag"}}, std::string("from_env")).output_dir ==
        "from_flag");

  CHECK_THROWS_AS(parse_config(dir / "missing.ini", {}), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("config validation names keys and ranges") {
  try {
    parse_config(std::nullopt, {{"omega_m", "0.3"}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const auto& k = e.keys();
    CHECK(std::find(k.begin(), k.end(), "omega_m") != k.end());
    CHECK(std::find(k.begin(), k.end(), "omega_lambda") != k.end());
  }
  try {
    parse_config(std::nullopt, {{"h", "1.5"}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.keys() == std::vector<std::string>{"h"});
    CHECK(std::string(e.what()).find("0.4") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(std::nullopt, {{"mass_min", "12"}, {"mass_max", "10"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(std::nullopt, {{"samples", "1"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(std::nullopt, {{"rel_tol", "0.1"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(std::nullopt, {{"return_fraction", "1"}}), ConfigError);
}

TEST_CASE("CSV formatting") {
  CHECK(format_sci(1.0) == "1.0000000000e+00");
  CHECK(format_sci(-2.5e-12) == "-2.5000000000e-12");
  CsvTable t({"a", "b"});
  t.add_row({0.0, 1234.5});
  t.add_row({1e300, -1.0});
  CHECK(t.rows() == 2);
  CHECK(t.render() == "a,b\n0.0000000000e+00,1.2345000000e+03\n1.0000000000e+300,-1.0000000000e+00\n");
  CHECK_THROWS_AS(t.add_row({1.0}), std::invalid_argument);
}

TEST_CASE("SHA-256 digests") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const fs::path dir = oracle::temp_dir("sha");
  write_file(dir / "abc.txt", "abc");
  CHECK(sha256_file(dir / "abc.txt") == sha256_hex("abc"));
  CHECK_THROWS_AS(sha256_file(dir / "none.txt"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("SVG line plot") {
  LinePlot plot;
  plot.title = "t & <t>";
  plot.x_label = "redshift z";
  plot.y_label = "rate";
  plot.log_y = true;
  for (int i = 0; i <= 50; ++i) {
    plot.xs.push_back(0.4 * i);
    plot.ys.push_back(std::exp(-0.1 * (i - 15) * (i - 15) / 10.0));
  }
  const std::string svg = plot.render_svg();
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("redshift z") != std::string::npos);
  CHECK(svg.find("t &amp; &lt;t&gt;") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg == plot.render_svg());
}

TEST_CASE("OutputSet writes atomically and rolls back") {
  const fs::path dir = oracle::temp_dir("set");
  OutputSet set;
  set.add("a.csv", "1\n");
  set.add("b.csv", "2\n");
  const auto written = set.commit(dir / "nested");
  REQUIRE(written.size() == 2);
  CHECK(oracle::slurp(dir / "nested" / "a.csv") == "1\n");

  // b.csv is blocked by a non-empty directory of the same name.
  const fs::path blocked = dir / "blocked";
  fs::create_directories(blocked / "b.csv" / "inner");
  CHECK_THROWS_AS(set.commit(blocked), IoError);
  CHECK_FALSE(fs::exists(blocked / "a.csv"));
  CHECK_FALSE(fs::exists(blocked / "a.csv.partial"));
  CHECK_FALSE(fs::exists(blocked / "b.csv.partial"));

  write_file(dir / "plain", "x");
  CHECK_THROWS_AS(set.commit(dir / "plain" / "sub"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("manifest records and verification") {
  ManifestRecord rec;
  rec.command = "background";
  rec.version = "1.0.0";
  rec.config = {{"tau", "2.5e9"}};
  rec.digests = {{"x.csv", "sha256:" + sha256_hex("data\n")}};
  rec.wall_clock_seconds = 1.25;
  const std::string text = rec.render();
  CHECK(text.find("command = background\n") != std::string::npos);
  CHECK(text.find("version = 1.0.0\n") != std::string::npos);
  CHECK(text.find("config.tau = 2.5e9\n") != std::string::npos);
  CHECK(text.find("file.x.csv = sha256:") != std::string::npos);
  CHECK(text.find("wall_clock_seconds = 1.250\n") != std::string::npos);

  const fs::path dir = oracle::temp_dir("man");
  write_file(dir / "x.csv", "data\n");
  write_file(dir / "m.txt", text);
  CHECK(verify_manifest(dir / "m.txt").empty());
  write_file(dir / "x.csv", "dava\n");
  CHECK(verify_manifest(dir / "m.txt").size() == 1);
  fs::remove(dir / "x.csv");
  CHECK(verify_manifest(dir / "m.txt").size() == 1);
  CHECK_THROWS_AS(verify_manifest(dir / "missing.txt"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("background command") {
  const fs::path dir = oracle::temp_dir("bg");
  const RunResult r = cmd_background(config_in(dir));
  REQUIRE(r.files.size() == 1);
  CHECK(r.files[0].filename() == "background.csv");
  CHECK(r.manifest.filename() == "manifest_background.txt");

  const std::string raw = oracle::slurp(dir / "background.csv");
  CHECK(raw.back() == '\n');
  CHECK(raw.find('\r') == std::string::npos);
  const Csv csv = read_csv(dir / "background.csv");
  CHECK(csv.header == "z,t_yr,d_c_mpc,v_c_mpc3,growth,delta_c");
  REQUIRE(csv.rows.size() == 2001);

  const std::regex sci(R"(-?\d\.\d{10}e[+-]\d{2,3})");
  for (const auto& row : csv.cells) {
    REQUIRE(row.size() == 6);
    for (const auto& cell : row)
      CHECK(std::regex_match(cell, sci));
  }
  CHECK(csv.rows.front()[0] == 0.0);
  CHECK(csv.rows.front()[2] == 0.0);
  CHECK(csv.rows.front()[4] == 1.0);
  CHECK(csv.rows.back()[0] == 20.0);

  const Background bg{CosmologyParams{}};
  bool found = false;
  for (const auto& row : csv.rows) {
    if (std::fabs(row[0] - 5.0) < 1e-9) {
      found = true;
      CHECK(oracle::rel(row[1], bg.age(5.0)) < 1e-10);
    }
  }
  CHECK(found);
  CHECK(verify_manifest(r.manifest).empty());
  fs::remove_all(dir);
}

TEST_CASE("massfn command") {
  const fs::path dir = oracle::temp_dir("mf");
  RunConfig config = config_in(dir);
  const RunResult r = cmd_massfn(config, 2.0);
  REQUIRE(r.files.size() == 1);
  CHECK(r.files[0].filename() == massfn_file_name(2.0));
  CHECK(massfn_file_name(2.0) == "massfn_z2.csv");
  CHECK(massfn_file_name(0.5) == "massfn_z0.5.csv");
  CHECK(r.manifest.filename() == "manifest_massfn_z2.txt");

  const Csv csv = read_csv(r.files[0]);
  CHECK(csv.header == "log10_m,dn_dm,n_above,sigma,dlnsigma_dlnm");
  REQUIRE(csv.rows.size() == 121);
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    CHECK(csv.rows[i][1] >= 0.0);
    if (i > 0)
      CHECK(csv.rows[i][2] <= csv.rows[i - 1][2]);
  }

  // Cells reproduce library calls exactly, up to the fixed format.
  const Model model = Model::build(config);
  for (std::size_t i : {0u, 37u, 120u}) {
    const double m = std::pow(10.0, csv.rows[i][0]);
    CHECK(csv.cells[i][1] == format_sci(model.press_schechter.mass_function(m, 2.0)));
    CHECK(csv.cells[i][2] == format_sci(model.press_schechter.number_density_above(m, 2.0)));
    CHECK(csv.cells[i][3] == format_sci(model.sigma.sigma(m)));
  }
  CHECK_THROWS_AS(cmd_massfn(config, 25.0), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("csfr command is deterministic and single peaked") {
  const fs::path a = oracle::temp_dir("csfr_a");
  const fs::path b = oracle::temp_dir("csfr_b");
  const RunResult ra = cmd_csfr(config_in(a));
  cmd_csfr(config_in(b));
  for (const char* name : {"csfr.csv", "csfr.svg"})
    CHECK(oracle::slurp(a / name) == oracle::slurp(b / name));

  const Csv csv = read_csv(a / "csfr.csv");
  CHECK(csv.header == "z,t_yr,rho_gas,csfr");
  REQUIRE(csv.rows.size() == 2001);
  int changes = 0;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    CHECK(csv.rows[i][3] >= 0.0);
    if (i >= 2) {
      const bool up0 = csv.rows[i - 1][3] > csv.rows[i - 2][3];
      const bool up1 = csv.rows[i][3] > csv.rows[i - 1][3];
      changes += up0 != up1;
    }
  }
  CHECK(changes == 1);

  // Digest lines agree; only the wall clock may differ.
  auto digests = [](const fs::path& m) {
    std::vector<std::string> out;
    for (const auto& line : lines_of(oracle::slurp(m)))
      if (line.rfind("file.", 0) == 0)
        out.push_back(line);
    return out;
  };
  CHECK(digests(a / "manifest_csfr.txt").size() == 2);
  CHECK(digests(a / "manifest_csfr.txt") == digests(b / "manifest_csfr.txt"));
  CHECK(verify_manifest(ra.manifest).empty());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("command line: subcommands and exit codes") {
  const fs::path dir = oracle::temp_dir("cli");
  const std::string out = (dir / "out").string();

  SUBCASE("background with overrides") {
    const Cli r = cli({"background", "--z-max", "10", "--samples", "100", "-o", out});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("background.csv") != std::string::npos);
    const Csv csv = read_csv(fs::path(out) / "background.csv");
    CHECK(csv.rows.size() == 101);
    CHECK(csv.rows.back()[0] == 10.0);
    const auto manifest = oracle::slurp(fs::path(out) / "manifest_background.txt");
    CHECK(manifest.find("config.z_max = " + format_sci(10.0)) != std::string::npos);
    CHECK(cli({"verify", (fs::path(out) / "manifest_background.txt").string()}).code == exit_ok);
  }
  SUBCASE("underscore spelling and config file") {
    const fs::path cfg = dir / "run.ini";
    write_file(cfg, "z_max = 5\nsamples = 50\n");
    const Cli r = cli({"background", "--config", cfg.string(), "--z_max", "4", "--output-dir", out});
    CHECK(r.code == exit_ok);
    CHECK(read_csv(fs::path(out) / "background.csv").rows.back()[0] == 4.0);
  }
  SUBCASE("massfn requires a redshift") {
    CHECK(cli({"massfn", "-o", out}).code == exit_config);
    const Cli r = cli({"massfn", "--z", "3", "--mass-samples", "20", "-o", out});
    CHECK(r.code == exit_ok);
    CHECK(fs::exists(fs::path(out) / "massfn_z3.csv"));
    CHECK(cli({"massfn", "--z", "30", "-o", out}).code == exit_config);
  }
  SUBCASE("config errors") {
    const Cli typo = cli({"background", "--tua", "1e9", "-o", out});
    CHECK(typo.code == exit_config);
    CHECK(typo.err.find("--tau") != std::string::npos);
    const Cli flat = cli({"background", "--omega-m", "0.3", "-o", out});
    CHECK(flat.code == exit_config);
    CHECK(flat.err.find("omega_m") != std::string::npos);
    CHECK(flat.err.find("omega_lambda") != std::string::npos);
    CHECK(cli({"background", "--h", "abc", "-o", out}).code == exit_config);
    CHECK(cli({"background", "--config", (dir / "none.ini").string()}).code == exit_config);
    CHECK(cli({}).code == exit_config);
    CHECK(cli({"bogus"}).code == exit_config);
    CHECK(cli({"--help"}).code == exit_ok);
  }
  SUBCASE("i/o failure") {
    write_file(dir / "plain", "x");
    const Cli r = cli({"background", "-o", (dir / "plain" / "sub").string()});
    CHECK(r.code == exit_io);
    CHECK(r.err.find((dir / "plain").string()) != std::string::npos);
  }
  SUBCASE("numerical failure leaves no files behind") {
    const Cli r = cli({"csfr", "--sigma8", "0.01", "-o", out});
    CHECK(r.code == exit_numerical);
    CHECK_FALSE(fs::exists(fs::path(out) / "csfr.csv"));
    CHECK_FALSE(fs::exists(fs::path(out) / "csfr.svg"));
  }
  SUBCASE("verify detects tampering") {
    REQUIRE(cli({"background", "--samples", "20", "-o", out}).code == exit_ok);
    const fs::path csv = fs::path(out) / "background.csv";
    std::string bytes = oracle::slurp(csv);
    bytes[bytes.size() / 2] ^= 1;
    write_file(csv, bytes);
    const Cli r = cli({"verify", (fs::path(out) / "manifest_background.txt").string()});
    CHECK(r.code == exit_failure);
    CHECK(r.err.find("background.csv") != std::string::npos);
  }
  SUBCASE("environment sets the lowest-precedence output dir") {
    const std::string env_dir = (dir / "env").string();
    ::setenv("COSMICHIST_OUTPUT_DIR", env_dir.c_str(), 1);
    CHECK(cli({"background", "--samples", "10"}).code == exit_ok);
    CHECK(fs::exists(fs::path(env_dir) / "background.csv"));
    CHECK(cli({"background", "--samples", "10", "-o", out}).code == exit_ok);
    CHECK(fs::exists(fs::path(out) / "background.csv"));
    ::unsetenv("COSMICHIST_OUTPUT_DIR");
  }
  fs::remove_all(dir);
}

#ifdef COSMICHIST_TOOL
TEST_CASE("installed tool reports exit status to the shell") {
  const fs::path dir = oracle::temp_dir("tool");
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  const std::string tool = COSMICHIST_TOOL;
  CHECK(status(tool + " background --samples 10 -o " + (dir / "o").string()) == 0);
  CHECK(status(tool + " background --omega-m 0.5") == 2);
  CHECK(status(tool + " --version") == 0);
  fs::remove_all(dir);
}
#endif
