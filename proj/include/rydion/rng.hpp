#pragma once

#include <cstdint>
#include <random>

namespace rydion {

// Seeded generator with explicit substreams so Monte-Carlo replicas are
// independent and reproducible: replica k draws from substream(seed, k)
// regardless of evaluation order. No global state anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static Rng substream(std::uint64_t seed, std::uint64_t stream);

  // Seed for substream(seed, stream)'s engine, for code that forwards a seed
  // instead of a generator.
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t raw();
  double uniform();                         // [0, 1)
  double uniform(double lo, double hi);     // [lo, hi)
  double normal(double mean, double sd);    // Box-Muller
  std::int64_t binomial(std::int64_t trials, double p);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rydion
