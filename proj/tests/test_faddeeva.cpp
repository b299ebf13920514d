#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>

#include "doctest.h"
#include "rydion/constants.hpp"
#include "rydion/errors.hpp"
#include "rydion/faddeeva.hpp"
#include "rydion/lineshape.hpp"

using namespace rydion;

namespace {

// reference values from a 30-digit erfc evaluation, V(x; sigma, fwhm)
struct VoigtRef {
  double x, sigma, fwhm, value;
};
constexpr VoigtRef refs[] = {
    {0.0, 1.0, 1.0, 0.27895547038929439},
    {0.5, 1.0, 1.0, 0.25636409410858458},
    {2.0, 1.0, 1.0, 0.082424082788586942},
    {10.0, 1.0, 1.0, 0.0016374553876309848},
    {0.0, 1.0, 0.0, 0.39894228040143268},
    {1.0, 1.0, 0.0, 0.24197072451914335},
    {0.0, 0.3, 2.0, 0.29517820955071474},
    {3.0, 0.3, 2.0, 0.032601145146075542},
    {0.7, 2.0, 0.1, 0.18416010641268658},
    {25.0, 0.5, 0.5, 0.0001274642673990034},
    {0.0, 0.0, 1.0, 0.63661977236758134},
    {100.0, 1.0, 3.0, 4.7750062748231382e-5},
};

}  // namespace

TEST_CASE("voigt profile against high-precision references") {
  for (const auto& r : refs) {
    const double got = voigt_profile(r.x, 0.0, {r.sigma, r.fwhm});
    CHECK(got == doctest::Approx(r.value).epsilon(5e-7));
  }
}

TEST_CASE("voigt peak matches the profile at line center") {
  const double peaks[][3] = {
      {1.0, 1.0, 0.27895547038929439},
      {0.3, 2.0, 0.29517820955071474},
      {2.0, 0.1, 0.19555378205992707},
  };
  for (const auto& p : peaks) {
    const VoigtParams vp{p[0], p[1]};
    CHECK(voigt_peak(vp) == doctest::Approx(p[2]).epsilon(5e-7));
    CHECK(voigt_peak(vp) == doctest::Approx(voigt_profile(0.0, 0.0, vp)).epsilon(1e-12));
  }
}

TEST_CASE("profile is symmetric and monotone off the peak") {
  const VoigtParams vp{0.8, 1.3};
  double prev = voigt_profile(0.0, 0.0, vp);
  for (double x = 0.25; x < 30.0; x += 0.25) {
    CHECK(voigt_profile(x, 0.0, vp) == doctest::Approx(voigt_profile(-x, 0.0, vp)).epsilon(1e-13));
    const double v = voigt_profile(x, 0.0, vp);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("center parameter translates the profile") {
  const VoigtParams vp{1.1, 0.7};
  CHECK(voigt_profile(3.5, 2.0, vp) == doctest::Approx(voigt_profile(1.5, 0.0, vp)).epsilon(1e-13));
}

TEST_CASE("faddeeva basics") {
  CHECK(faddeeva({0.0, 0.0}).real() == doctest::Approx(1.0).epsilon(1e-14));
  // w(iy) = erfcx(y) on the imaginary axis
  for (double y : {0.1, 1.0, 5.0, 20.0}) {
    CHECK(faddeeva({0.0, y}).real() == doctest::Approx(erfcx(y)).epsilon(1e-11));
    CHECK(std::abs(faddeeva({0.0, y}).imag()) < 1e-12);
  }
  // real axis: Re w(x) = exp(-x^2) exactly
  for (double x : {0.3, 1.0, 2.5, 4.0}) {
    CHECK(faddeeva({x, 0.0}).real() == doctest::Approx(std::exp(-x * x)).epsilon(1e-13));
  }
}

TEST_CASE("erfcx asymptotics") {
  // erfcx(t) -> 1/(t sqrt(pi)) for large t
  for (double t : {30.0, 100.0, 1000.0}) {
    const double asym = 1.0 / (t * std::sqrt(pi));
    CHECK(erfcx(t) == doctest::Approx(asym).epsilon(1e-3));
    CHECK(erfcx(t) < asym);  // series is alternating, first correction negative
  }
}

TEST_CASE("degenerate width pair is rejected") {
  CHECK_THROWS_AS(voigt_profile(0.0, 0.0, {0.0, 0.0}), ConfigError);
}
