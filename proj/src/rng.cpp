#include "rydion/rng.hpp"

#include <cmath>

#include "rydion/constants.hpp"

namespace rydion {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::substream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(derive_seed(seed, stream));
}

std::uint64_t Rng::derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed;
  std::uint64_t mixed = splitmix64(state);
  state = mixed ^ (stream * 0xD1B54A32D192ED03ULL + 0x2545F4914F6CDD1DULL);
  return splitmix64(state);
}

std::uint64_t Rng::raw() { return engine_(); }

double Rng::uniform() {
  // 53 uniform bits in [0, 1)
  return static_cast<double>(raw() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal(double mean, double sd) {
  if (have_spare_) {
    have_spare_ = false;
    return mean + sd * spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  spare_ = r * std::sin(two_pi * u2);
  have_spare_ = true;
  return mean + sd * r * std::cos(two_pi * u2);
}

std::int64_t Rng::binomial(std::int64_t trials, double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < trials; ++i)
    if (uniform() < p) ++hits;
  return hits;
}

}  // namespace rydion
