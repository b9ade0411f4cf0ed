#include <doctest.h>

#include "cosmichist/csfr.hpp"
#include "cosmichist/errors.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace cosmichist;
using doctest::Approx;

namespace {

struct Fixture {
  PressSchechter ps;
  StructureGrid grid;

  Fixture()
      : ps(Background(CosmologyParams{}), SigmaTable(PowerSpectrum(CosmologyParams{}))),
        grid(ps) {}

  const Background& background() const { return ps.background(); }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

const CSFRHistory& fiducial_history() {
  static const CSFRHistory h = run_csfr(fixture().background(), SFParams{}, fixture().grid);
  return h;
}

} // namespace

TEST_CASE("SFParams validation") {
  CHECK_NOTHROW(SFParams{}.validate());
  auto keys_of = [](SFParams sf) {
    try {
      sf.validate();
    } catch (const ParameterError& e) {
      return e.keys();
    }
    return std::vector<std::string>{};
  };
  SFParams sf;
  sf.tau = 0.0;
  CHECK(keys_of(sf) == std::vector<std::string>{"tau"});
  sf = {};
  sf.n = -1.0;
  CHECK(keys_of(sf) == std::vector<std::string>{"n"});
  sf = {};
  sf.m_high = 0.05;
  CHECK(keys_of(sf) == std::vector<std::string>{"m_low", "m_high"});
  sf = {};
  sf.return_fraction = 1.0;
  CHECK(keys_of(sf) == std::vector<std::string>{"return_fraction"});
}

TEST_CASE("IMF normalisation") {
  CHECK(imf_normalization(SFParams{}) == Approx(oracle::salpeter_A).epsilon(1e-12));
  CHECK(imf_normalization(SFParams{}) == Approx(0.1698).epsilon(1e-3));

  SFParams doubled;
  doubled.m_high = 280.0;
  CHECK(imf_normalization(doubled) == Approx(oracle::salpeter_A_doubled).epsilon(1e-12));
  CHECK(std::fabs(imf_normalization(doubled) / imf_normalization(SFParams{}) - 1.0) < 0.05);

  SFParams flat;
  flat.x = 1.0;
  CHECK(imf_normalization(flat) == Approx(1.0 / std::log(1400.0)).epsilon(1e-14));
  SFParams near = flat;
  near.x = 1.0 + 1e-7;
  CHECK(imf_normalization(near) == Approx(imf_normalization(flat)).epsilon(1e-5));
}

TEST_CASE("normalised IMF carries unit mass") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ux(0.3, 2.5), ulo(0.05, 1.0), uhi(10.0, 300.0);
  for (int i = 0; i < 30; ++i) {
    SFParams sf;
    sf.x = ux(rng);
    sf.m_low = ulo(rng);
    sf.m_high = uhi(rng);
    const double a = imf_normalization(sf);
    // m * A m^-(1+x) dm = A m^(1-x) d ln m.
    const double mass = oracle::trapezoid([&](double lm) { return a * std::exp((1.0 - sf.x) * lm); },
                                          std::log(sf.m_low), std::log(sf.m_high), 200000);
    CHECK(mass == Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("star formation rate") {
  const SFParams sf;
  CHECK(star_formation_rate(1e8, sf, 1e6) == Approx(0.04).epsilon(1e-15));
  CHECK(star_formation_rate(1e8, sf, 1e6) == star_formation_rate(1e8, sf, 3e9));
  SFParams quad = sf;
  quad.n = 2.0;
  CHECK(star_formation_rate(0.0, sf, 1e6) == 0.0);
  CHECK(star_formation_rate(0.0, quad, 1e6) == 0.0);
  CHECK(star_formation_rate(2e6, quad, 1e6) == Approx(4e12 / (2.5e9 * 1e6)).epsilon(1e-14));
  CHECK_THROWS_AS(star_formation_rate(-1.0, sf, 1e6), DomainError);
  CHECK_THROWS_AS(star_formation_rate(1.0, sf, 0.0), DomainError);
}

TEST_CASE("fiducial history shape and invariants") {
  const CSFRHistory& h = fiducial_history();
  REQUIRE(h.zs.size() == 2001);
  REQUIRE(h.ts.size() == h.zs.size());
  REQUIRE(h.rho_gas.size() == h.zs.size());
  REQUIRE(h.csfr.size() == h.zs.size());
  CHECK(h.zs.front() == 0.0);
  CHECK(h.zs.back() == Approx(20.0));
  CHECK(h.floor_count == 0);

  CHECK(h.rho_gas_init == fixture().grid.baryon_density(20.0));
  CHECK(h.csfr.back() == Approx(h.rho_gas_init / 2.5e9).epsilon(1e-15));

  for (std::size_t i = 0; i < h.zs.size(); ++i) {
    CHECK(h.rho_gas[i] >= 0.0);
    CHECK(h.csfr[i] >= 0.0);
    if (h.zs[i] > 0.0 && h.zs[i] < 20.0)
      CHECK(h.csfr[i] > 0.0);
    if (i > 0)
      CHECK(h.ts[i] < h.ts[i - 1]);
  }

  // Exactly one sign change of the discrete derivative: a single interior peak.
  int changes = 0;
  for (std::size_t i = 2; i < h.csfr.size(); ++i) {
    const double d0 = h.csfr[i - 1] - h.csfr[i - 2];
    const double d1 = h.csfr[i] - h.csfr[i - 1];
    if ((d0 > 0) != (d1 > 0))
      ++changes;
  }
  CHECK(changes == 1);
  const auto peak = std::max_element(h.csfr.begin(), h.csfr.end()) - h.csfr.begin();
  CHECK(h.zs[peak] > 0.0);
  CHECK(h.zs[peak] < 20.0);
}

TEST_CASE("stellar mass never exceeds the baryons supplied") {
  const CSFRHistory& h = fiducial_history();
  const StructureGrid& g = fixture().grid;
  const double slack = 1e-6 * g.rho_b_struct().front();
  double stars = 0.0;
  for (std::size_t i = h.zs.size() - 1; i-- > 0;) {
    stars += 0.5 * (h.csfr[i] + h.csfr[i + 1]) * (h.ts[i] - h.ts[i + 1]);
    // Initial gas plus everything accreted since z_max is rho_b_struct(z).
    CHECK(stars <= g.baryon_density(h.zs[i]) + slack);
    CHECK(stars <= g.rho_b_struct().front() + slack);
  }
  // Gas bookkeeping closes: stars formed = supplied - gas left.
  CHECK(oracle::rel(stars, g.rho_b_struct().front() - h.rho_gas.front()) < 1e-3);
}

TEST_CASE("short timescale tracks the accretion rate") {
  SFParams fast;
  fast.tau = 1e7;
  const CSFRHistory h = run_csfr(fixture().background(), fast, fixture().grid);
  for (double z : {1.0, 2.0, 4.0, 8.0})
    CHECK(oracle::rel(csfr_at(h, z), fixture().grid.accretion_rate(z)) < 0.05);
}

TEST_CASE("doubling tau halves the initial rate") {
  SFParams slow;
  slow.tau = 5e9;
  const CSFRHistory h = run_csfr(fixture().background(), slow, fixture().grid);
  CHECK(h.csfr.back() * 2.0 == fiducial_history().csfr.back());
}

TEST_CASE("runs are bitwise reproducible") {
  const CSFRHistory again = run_csfr(fixture().background(), SFParams{}, fixture().grid);
  CHECK(again.zs == fiducial_history().zs);
  CHECK(again.ts == fiducial_history().ts);
  CHECK(again.rho_gas == fiducial_history().rho_gas);
  CHECK(again.csfr == fiducial_history().csfr);
}

TEST_CASE("other star formation laws") {
  SFParams quad;
  quad.n = 2.0;
  const CSFRHistory h2 = run_csfr(fixture().background(), quad, fixture().grid);
  CHECK(h2.floor_count == 0);
  for (double v : h2.csfr)
    CHECK(v >= 0.0);

  SFParams recycled;
  recycled.return_fraction = 0.3;
  const CSFRHistory hr = run_csfr(fixture().background(), recycled, fixture().grid);
  CHECK(hr.rho_gas.front() > fiducial_history().rho_gas.front());
  CHECK(hr.csfr.back() == fiducial_history().csfr.back());
}

TEST_CASE("csfr_at") {
  const CSFRHistory& h = fiducial_history();
  for (std::size_t i = 0; i < h.zs.size(); i += 97)
    CHECK(csfr_at(h, h.zs[i]) == h.csfr[i]);
  for (double z = 0.0; z <= 20.0; z += 0.0371)
    CHECK(csfr_at(h, z) >= 0.0);
  CHECK_THROWS_AS(csfr_at(h, -0.01), RangeError);
  CHECK_THROWS_AS(csfr_at(h, 20.5), RangeError);
  CHECK_THROWS_AS(csfr_at(CSFRHistory{}, 1.0), std::invalid_argument);
}

TEST_CASE("halving the ODE tolerance is stable") {
  CsfrOptions tight;
  tight.tol = ToleranceSpec{}.halved();
  const CSFRHistory h = run_csfr(fixture().background(), SFParams{}, fixture().grid, tight);
  CHECK(oracle::rel(csfr_at(h, 3.0), csfr_at(fiducial_history(), 3.0)) < 1e-3);
}

TEST_CASE("run_csfr argument checks") {
  CsfrOptions bad;
  bad.samples = 1;
  CHECK_THROWS_AS(run_csfr(fixture().background(), SFParams{}, fixture().grid, bad),
                  std::invalid_argument);
  SFParams sf;
  sf.tau = -1.0;
  CHECK_THROWS_AS(run_csfr(fixture().background(), sf, fixture().grid), ParameterError);

  CosmologyParams shallow;
  shallow.z_max = 10.0;
  CHECK_THROWS_AS(run_csfr(Background(shallow), SFParams{}, fixture().grid), std::invalid_argument);
}
