#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "rydion/constants.hpp"
#include "rydion/errors.hpp"
#include "rydion/kick.hpp"

using namespace rydion;

namespace {

KickModel resonant(double volts) {
  return {4.870588e6, volts, 100.0, 1.8 * mhz, 1.8 * mhz};
}

}  // namespace

TEST_CASE("resonant displacement is linear in the pulse area") {
  const struct {
    double volts, alpha;
  } rows[] = {
      {0.010, 2.70588222222}, {0.014, 3.78823511111}, {0.0222, 6.00705853333},
      {0.0296, 8.00941137778}, {0.037, 10.0117642222}, {0.040, 10.8235288889},
  };
  for (const auto& r : rows)
    CHECK(kick_to_alpha(resonant(r.volts)) == doctest::Approx(r.alpha).epsilon(1e-11));
  CHECK(kick_to_alpha(resonant(0.020)) ==
        doctest::Approx(2.0 * kick_to_alpha(resonant(0.010))).epsilon(1e-13));
}

TEST_CASE("detuning reduces the displacement through the sinc") {
  KickModel k = resonant(0.020);
  const double on = kick_to_alpha(k);
  k.mode_freq = 1.8 * mhz * (1.0 + 2e-4);
  const double off = kick_to_alpha(k);
  CHECK(off < on);
  CHECK(off > 0.0);
  // analytic sinc factor: delta T / 2 with T = cycles / f_drive
  const double t = 100.0 / 1.8e6;
  const double half = 0.5 * (1.8 * mhz - k.mode_freq) * t;
  CHECK(off == doctest::Approx(on * std::abs(std::sin(half) / half)).epsilon(1e-12));
}

TEST_CASE("full phase-space revolutions leave no displacement") {
  KickModel k = resonant(0.020);
  // delta T = 2 pi: detuning of exactly one cycle over the burst
  const double t = 100.0 / 1.8e6;
  k.mode_freq = k.drive_freq - two_pi / t;
  CHECK(kick_to_alpha(k) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("invalid kick parameters are rejected") {
  KickModel k = resonant(0.02);
  k.kappa = 0.0;
  CHECK_THROWS_AS(kick_to_alpha(k), ConfigError);
  k = resonant(0.02);
  k.cycles = 0.5;
  CHECK_THROWS_AS(kick_to_alpha(k), ConfigError);
  k = resonant(0.02);
  k.drive_freq = 0.0;
  CHECK_THROWS_AS(kick_to_alpha(k), ConfigError);
}
