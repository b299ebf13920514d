#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rydion/phonon.hpp"

namespace rydion {

// Carrier/sideband Rabi model on the quadrupole transition.
// omega0 is the n = 0 carrier Rabi frequency (rad/s), eta the Lamb-Dicke
// parameter, gamma_dec the universal decoherence rate (1/s) applied as one
// exponential across all n, amplitude the excitation contrast in (0, 1].
struct RabiModel {
  double omega0 = 0.0;
  double eta = 0.0;
  double gamma_dec = 0.0;
  double amplitude = 1.0;
  int sideband = 0;  // ..., -1 red, 0 carrier, +1 blue, ...
};

struct RabiDataset {
  std::vector<double> tau;   // s, strictly increasing
  std::vector<double> prob;  // [0, 1]
  std::int64_t shots = 0;
};

// Coupling strength between |n> and |n+s>:
//   Omega = omega0 e^{-eta^2/2} eta^{|s|} sqrt(n_<! / n_>!) L_{n_<}^{|s|}(eta^2)
// evaluated with log-space factorials and the degree recurrence for the
// generalized Laguerre polynomial; stable beyond the Lamb-Dicke regime
// (checked against operator matrix elements to n = 300, eta = 0.3).
// Can be negative: only |Omega| is observable. Throws InvalidSideband
// when n + s < 0.
double rabi_frequency(int n, int s, double omega0, double eta);

// First-order expansion (Omega ~ omega0 eta^|s| sqrt(n_>!/n_<!/...) without
// the Laguerre factor), kept for comparison plots only.
double rabi_frequency_lamb_dicke(int n, int s, double omega0, double eta);

// P(tau) = sum_n P_n * A/2 * (1 - cos(Omega_{n,n+s} tau)) * e^{-gamma tau}
// over the truncated support; terms with n + s < 0 do not contribute.
double excitation_probability(double tau, const RabiModel& model, const PhononDistribution& dist,
                              double tail_mass = 1e-6);

// Binomial shot statistics on the model curve; deterministic under seed.
RabiDataset simulate_dataset(const RabiModel& model, const PhononDistribution& dist,
                             std::span<const double> taus, std::int64_t shots,
                             std::uint64_t seed);

}  // namespace rydion
