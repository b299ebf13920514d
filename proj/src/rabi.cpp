#include "rydion/rabi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rydion/errors.hpp"
#include "rydion/rng.hpp"

namespace rydion {

namespace {

// L_k^a(x) by the three-term recurrence in the degree, stable for the
// small arguments x = eta^2 used here.
double laguerre(int k, int a, double x) {
  if (k == 0) return 1.0;
  double lm1 = 1.0;
  double l = 1.0 + a - x;
  for (int j = 2; j <= k; ++j) {
    const double next = ((2.0 * j - 1.0 + a - x) * l - (j - 1.0 + a) * lm1) / j;
    lm1 = l;
    l = next;
  }
  return l;
}

void check_sideband(int n, int s) {
  if (n < 0) throw InvalidSideband("phonon index must be >= 0");
  if (n + s < 0)
    throw InvalidSideband("sideband s = " + std::to_string(s) + " undefined from n = " +
                          std::to_string(n));
}

}  // namespace

double rabi_frequency(int n, int s, double omega0, double eta) {
  check_sideband(n, s);
  const int lo = std::min(n, n + s);
  const int hi = std::max(n, n + s);
  const int order = hi - lo;
  const double x = eta * eta;
  const double log_pref = -0.5 * x + (order == 0 ? 0.0 : order * std::log(eta)) +
                          0.5 * (std::lgamma(lo + 1.0) - std::lgamma(hi + 1.0));
  return omega0 * std::exp(log_pref) * laguerre(lo, order, x);
}

double rabi_frequency_lamb_dicke(int n, int s, double omega0, double eta) {
  check_sideband(n, s);
  const int lo = std::min(n, n + s);
  const int hi = std::max(n, n + s);
  double fac = 1.0;
  for (int j = lo + 1; j <= hi; ++j) fac *= j;
  return omega0 * std::pow(eta, hi - lo) * std::sqrt(fac) / std::tgamma(hi - lo + 1.0);
}

double excitation_probability(double tau, const RabiModel& model, const PhononDistribution& dist,
                              double tail_mass) {
  const int n_max = truncation_bound(dist, tail_mass);
  const double damp = std::exp(-model.gamma_dec * tau);
  double p = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    if (n + model.sideband < 0) continue;
    const double w = dist.pmf(n);
    if (w == 0.0) continue;
    const double omega = rabi_frequency(n, model.sideband, model.omega0, model.eta);
    p += w * 0.5 * model.amplitude * (1.0 - std::cos(omega * tau)) * damp;
  }
  return p;
}

RabiDataset simulate_dataset(const RabiModel& model, const PhononDistribution& dist,
                             std::span<const double> taus, std::int64_t shots,
                             std::uint64_t seed) {
  if (shots < 1) throw ConfigError("shots must be >= 1");
  for (std::size_t i = 1; i < taus.size(); ++i)
    if (!(taus[i] > taus[i - 1])) throw ConfigError("pulse durations must be strictly increasing");

  RabiDataset data;
  data.tau.assign(taus.begin(), taus.end());
  data.prob.resize(taus.size());
  data.shots = shots;
  Rng rng(seed);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double p = excitation_probability(taus[i], model, dist);
    data.prob[i] = static_cast<double>(rng.binomial(shots, p)) / static_cast<double>(shots);
  }
  return data;
}

}  // namespace rydion
