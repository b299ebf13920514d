#include "rydion/phonon.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rydion/errors.hpp"

namespace rydion {

PhononDistribution PhononDistribution::thermal(double nbar) {
  if (!(nbar >= 0.0)) throw ConfigError("thermal nbar must be >= 0");
  PhononDistribution d;
  d.kind_ = Kind::thermal;
  d.nbar_ = nbar;
  return d;
}

PhononDistribution PhononDistribution::coherent(double alpha) {
  if (!(alpha >= 0.0)) throw ConfigError("coherent |alpha| must be >= 0");
  PhononDistribution d;
  d.kind_ = Kind::coherent;
  d.alpha_ = alpha;
  return d;
}

PhononDistribution PhononDistribution::fock(int n) {
  if (n < 0) throw ConfigError("fock index must be >= 0");
  PhononDistribution d;
  d.kind_ = Kind::fock;
  d.fock_n_ = n;
  return d;
}

PhononDistribution PhononDistribution::tabulated(
    const std::vector<std::pair<int, double>>& weights) {
  if (weights.empty()) throw ConfigError("tabulated distribution must not be empty");
  int n_max = 0;
  double sum = 0.0;
  for (auto [n, p] : weights) {
    if (n < 0) throw ConfigError("tabulated phonon index must be >= 0");
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("tabulated probability outside [0, 1]");
    n_max = std::max(n_max, n);
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw ConfigError("tabulated probabilities sum to " + std::to_string(sum) + ", expected 1");
  PhononDistribution d;
  d.kind_ = Kind::tabulated;
  d.table_.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (auto [n, p] : weights) d.table_[static_cast<std::size_t>(n)] += p / sum;
  return d;
}

double PhononDistribution::pmf(int n) const {
  if (n < 0) return 0.0;
  switch (kind_) {
    case Kind::thermal:
      return thermal_pmf(nbar_, n);
    case Kind::coherent:
      return coherent_pmf(alpha_, n);
    case Kind::fock:
      return n == fock_n_ ? 1.0 : 0.0;
    case Kind::tabulated:
      return static_cast<std::size_t>(n) < table_.size() ? table_[static_cast<std::size_t>(n)]
                                                         : 0.0;
  }
  return 0.0;
}

double coherent_pmf(double alpha, int n) {
  if (n < 0) return 0.0;
  const double mean = alpha * alpha;
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(mean) - std::lgamma(n + 1.0) - mean);
}

double thermal_pmf(double nbar, int n) {
  if (n < 0) return 0.0;
  if (nbar == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(nbar) - (n + 1.0) * std::log(nbar + 1.0));
}

int truncation_bound(const PhononDistribution& dist, double tail_mass) {
  if (!(tail_mass > 0.0 && tail_mass < 1.0)) throw ConfigError("tail_mass must be in (0, 1)");
  switch (dist.kind()) {
    case PhononDistribution::Kind::fock:
      return dist.fock_n();
    case PhononDistribution::Kind::tabulated:
      return static_cast<int>(dist.table().size()) - 1;
    case PhononDistribution::Kind::thermal: {
      const double nbar = dist.nbar();
      if (nbar == 0.0) return 0;
      // tail above N is (nbar / (nbar+1))^(N+1), exactly
      const double r = std::log(nbar / (nbar + 1.0));
      int n = std::max(0, static_cast<int>(std::ceil(std::log(tail_mass) / r)) - 2);
      while (std::exp((n + 1.0) * r) > tail_mass) ++n;
      while (n > 0 && std::exp(static_cast<double>(n) * r) <= tail_mass) --n;
      return n;
    }
    case PhononDistribution::Kind::coherent: {
      double cum = 0.0;
      for (int n = 0; n < 200000; ++n) {
        cum += coherent_pmf(dist.alpha(), n);
        if (1.0 - cum <= tail_mass) return n;
      }
      throw TruncationOverflow("coherent truncation bound not reached within 2e5 terms");
    }
  }
  throw ConfigError("unknown distribution kind");
}

std::pair<double, double> moments(const PhononDistribution& dist) {
  switch (dist.kind()) {
    case PhononDistribution::Kind::fock:
      return {static_cast<double>(dist.fock_n()), 0.0};
    case PhononDistribution::Kind::thermal: {
      const double n = dist.nbar();
      return {n, n * n + n};
    }
    case PhononDistribution::Kind::coherent: {
      const double mean = dist.alpha() * dist.alpha();
      return {mean, mean};
    }
    case PhononDistribution::Kind::tabulated: {
      double mean = 0.0, second = 0.0;
      const auto& t = dist.table();
      for (std::size_t n = 0; n < t.size(); ++n) {
        mean += n * t[n];
        second += static_cast<double>(n) * static_cast<double>(n) * t[n];
      }
      return {mean, second - mean * mean};
    }
  }
  throw ConfigError("unknown distribution kind");
}

}  // namespace rydion
