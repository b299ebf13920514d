#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "rydion/constants.hpp"
#include "rydion/errors.hpp"
#include "rydion/lineshape.hpp"

using namespace rydion;

namespace {

const VoigtParams widths{0.390435 * mhz, 2.0 * mhz};

SpectrumModel bare_model() {
  SpectrumModel m;
  m.voigt = widths;
  m.amplitude = 0.45;
  m.baseline = 0.02;
  return m;
}

}  // namespace

TEST_CASE("no modes means a single line at the center") {
  SpectrumModel m = bare_model();
  m.center = 1.5 * mhz;
  const auto lines = line_list(m);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].offset == 0.0);
  CHECK(lines[0].weight == 1.0);
  // peak-height normalization: the line tops out at baseline + amplitude
  const double grid[] = {1.5 * mhz};
  CHECK(spectrum(m, grid)[0] == doctest::Approx(0.47).epsilon(1e-12));
}

TEST_CASE("fock preparation shifts the single line by n quanta") {
  SpectrumModel m = bare_model();
  m.modes = {{-0.0962 * mhz, PhononDistribution::fock(5)}};
  const auto lines = line_list(m);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].offset == doctest::Approx(-0.481 * mhz).epsilon(1e-12));
  const double at_line[] = {-0.481 * mhz};
  CHECK(spectrum(m, at_line)[0] == doctest::Approx(0.47).epsilon(1e-12));
}

TEST_CASE("line weights are the joint phonon probabilities") {
  SpectrumModel m = bare_model();
  m.modes = {{-0.08 * mhz, PhononDistribution::thermal(0.4)},
             {-0.10 * mhz, PhononDistribution::coherent(1.2)}};
  const auto lines = line_list(m);
  double sum = 0.0;
  for (const auto& l : lines) sum += l.weight;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(lines.size() > 10);
}

TEST_CASE("centroid equals the occupation-weighted shift") {
  // dual route: closed-form first moment against the enumerated line list
  const struct {
    PhononDistribution x, y;
  } preps[] = {
      {PhononDistribution::thermal(0.4), PhononDistribution::thermal(0.4)},
      {PhononDistribution::thermal(10.0), PhononDistribution::thermal(3.0)},
      {PhononDistribution::thermal(0.4), PhononDistribution::coherent(6.0)},
      {PhononDistribution::coherent(12.0), PhononDistribution::coherent(2.4)},
      {PhononDistribution::fock(3), PhononDistribution::coherent(8.0)},
  };
  for (const auto& prep : preps) {
    SpectrumModel m = bare_model();
    m.center = 0.7 * mhz;
    m.tail_mass = 1e-9;
    m.max_terms = 4000000;
    m.modes = {{-0.0794 * mhz, prep.x}, {-0.0962 * mhz, prep.y}};
    const double expected = m.center + moments(prep.x).first * m.modes[0].delta_omega +
                            moments(prep.y).first * m.modes[1].delta_omega;
    const double got = spectrum_centroid(m);
    CHECK(got - m.center == doctest::Approx(expected - m.center).epsilon(1e-5));
  }
}

TEST_CASE("joint support over the cap raises truncation overflow") {
  SpectrumModel m = bare_model();
  m.max_terms = 1000;
  m.modes = {{-0.08 * mhz, PhononDistribution::thermal(10.0)},
             {-0.10 * mhz, PhononDistribution::thermal(10.0)}};
  CHECK_THROWS_AS(line_list(m), TruncationOverflow);
  CHECK_THROWS_AS(spectrum_centroid(m), TruncationOverflow);
}

TEST_CASE("tail mass refinement does not move the spectrum") {
  SpectrumModel coarse = bare_model();
  coarse.modes = {{-0.0794 * mhz, PhononDistribution::thermal(0.4)},
                  {-0.0962 * mhz, PhononDistribution::coherent(6.0)}};
  SpectrumModel fine = coarse;
  coarse.tail_mass = 1e-6;
  fine.tail_mass = 1e-9;
  std::vector<double> grid;
  for (int i = 0; i < 50; ++i) grid.push_back((-8.0 + 0.2 * i) * mhz);
  const auto a = spectrum(coarse, grid);
  const auto b = spectrum(fine, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-4));
}

TEST_CASE("spectrum stays inside its amplitude window") {
  SpectrumModel m = bare_model();
  m.modes = {{-0.0962 * mhz, PhononDistribution::coherent(4.0)}};
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back((-6.0 + 0.04 * i) * mhz);
  for (double v : spectrum(m, grid)) {
    CHECK(v >= m.baseline);
    CHECK(v <= m.baseline + m.amplitude + 1e-12);
  }
}

TEST_CASE("simulated spectra are deterministic and in range") {
  SpectrumModel m = bare_model();
  m.modes = {{-0.0962 * mhz, PhononDistribution::thermal(0.4)}};
  std::vector<double> grid;
  for (int i = 0; i < 30; ++i) grid.push_back((-3.0 + 0.2 * i) * mhz);
  const auto a = simulate_spectrum(m, grid, 100, 42);
  const auto b = simulate_spectrum(m, grid, 100, 42);
  const auto c = simulate_spectrum(m, grid, 100, 43);
  CHECK(a.prob == b.prob);
  CHECK(a.prob != c.prob);
  CHECK(a.shots == 100);
  for (double p : a.prob) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(std::round(p * 100.0) == doctest::Approx(p * 100.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(simulate_spectrum(m, grid, 0, 1), ConfigError);
}
