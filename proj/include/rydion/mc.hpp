#pragma once

#include <cstdint>
#include <vector>

#include "rydion/fit.hpp"
#include "rydion/lineshape.hpp"
#include "rydion/rabi.hpp"
#include "rydion/trap.hpp"

namespace rydion {

enum class McProblem { thermal_nbar, coherent_alpha, polarizability };

// Sampling widths for the nuisance parameters. Each replica draws the truth
// from these priors for data generation; the refit then assumes the nominal
// values, so the spread of the recovered parameter carries the systematic
// uncertainty an analyst would see.
struct McPriors {
  double eta_rel_sd = 0.10;     // Lamb-Dicke knowledge
  double alpha_rel_sd = 0.077;  // coherent state size knowledge (pol problem)
  double nbar_rel_sd = 0.10;    // preparation temperature knowledge
  double pol_lo = 0.5;          // pol truth range, x nominal
  double pol_hi = 2.0;
};

struct McConfig {
  int replicas = 1000;
  std::uint64_t seed = 0;
  McPriors priors;
  int fit_starts = 2;
  double max_failure_fraction = 0.20;
};

// Generating truth plus the nominal values the refits assume.
struct McSetup {
  std::int64_t shots = 100;

  // sideband problems
  RabiModel carrier;  // omega0, eta, gamma_dec, amplitude; sideband ignored
  double nbar_nominal = 0.4;
  double alpha_nominal = 6.0;
  std::vector<double> carrier_taus;   // carrier time grid, s
  std::vector<double> sideband_taus;  // red/blue time grid, s

  // polarizability problem
  TrapParameters trap;
  VoigtParams widths;
  double pol_nominal_e30 = 0.0;
  double spec_amplitude = 0.45;
  double spec_baseline = 0.02;
  std::vector<double> spec_grid;  // detunings, rad/s
};

struct McReport {
  McProblem problem{};
  int replicas = 0;
  int failures = 0;
  double nominal = 0.0;      // nominal value of the target parameter
  double mean_ratio = 0.0;   // mean of estimate / truth
  double rel_spread = 0.0;   // sd of estimate / truth
  double abs_spread = 0.0;   // sd of estimate - truth
  double mean_fit_sigma = 0.0;
  std::vector<double> truths;
  std::vector<double> estimates;
};

// Replica k draws its nuisances and shot noise from substreams of
// config.seed, generates datasets at the drawn truth, refits assuming the
// nominals, and the report aggregates the recovered-over-true ratios.
// Deterministic under fixed seed. Throws NonConvergence when more than
// max_failure_fraction of the replicas fail to converge.
McReport mc_uncertainty(McProblem problem, const McSetup& setup, const McConfig& config);

}  // namespace rydion
