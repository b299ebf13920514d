#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rydion/lineshape.hpp"
#include "rydion/phonon.hpp"
#include "rydion/rabi.hpp"
#include "rydion/trap.hpp"

namespace rydion {

// Reported estimates are in I/O units (MHz, us, 1e-30 C m^2/V); the unit
// string says which. Internals stay SI up to this boundary.
struct FitParameter {
  std::string name;
  double value = 0.0;
  double sigma = 0.0;
  std::string unit;
};

struct FitResult {
  std::vector<FitParameter> parameters;
  double residual_norm = 0.0;  // weighted chi^2 at the optimum
  double grad_norm = 0.0;      // objective gradient inf-norm at the optimum
  bool converged = false;
  int iterations = 0;

  double value(std::string_view name) const;
  double sigma(std::string_view name) const;
};

struct FitOptions {
  int starts = 8;
  std::uint64_t seed = 0;  // multi-start jitter stream
  int max_iterations = 500;
  double rel_tol = 1e-10;
  double tail_mass = 1e-6;
  std::optional<double> init_hint = {};  // target-parameter start override
};

// Fixed context for the single-parameter coherent fit, taken from a prior
// thermal calibration fit. SI units.
struct FixedRabiParams {
  double omega0 = 0.0;
  double eta = 0.0;
  double gamma_dec = 0.0;
  double amplitude = 1.0;
};

// Phonon preparation of one spectrum: radial x and y laws. The axial mode is
// carried by the Voigt sigma, not enumerated.
struct SpectrumPrep {
  PhononDistribution x = PhononDistribution::fock(0);
  PhononDistribution y = PhononDistribution::fock(0);
};

// Joint weighted fit of carrier, first red and first blue sideband curves
// with a shared thermal law: recovers {nbar, omega0, gamma, amplitude} at
// fixed eta. Binomial per-point weights, floored at 1/(2 shots).
// Throws NonConvergence when every start stalls.
FitResult fit_thermal_sidebands(const RabiDataset& carrier, const RabiDataset& red,
                                const RabiDataset& blue, double eta,
                                const FitOptions& opts = {});

// Common fit of red and blue sideband curves after a kick, with the phonon
// law coherent(|alpha|) and everything else fixed: recovers |alpha|.
// Starts from a deterministic grid scan unless init_hint is given.
// Throws AmbiguousFit when two separated |alpha| basins are statistically
// indistinguishable (delta chi^2 < 1).
FitResult fit_coherent_alpha(const RabiDataset& red, const RabiDataset& blue,
                             const FixedRabiParams& fixed, const FitOptions& opts = {});

// Correlated fit of a reference spectrum (near-ground thermal preparation)
// and an excited spectrum (coherent preparation) sharing the transition
// center and the polarizability. Phonon laws are fixed inputs; free
// parameters are {nu0, pol, amplitude and baseline per spectrum}. The
// polarizability is bounded above by the confinement limit through its
// transform, so the optimizer cannot wander out of the physical domain.
FitResult fit_spectrum_pair(const SpectrumDataset& reference, const SpectrumPrep& ref_prep,
                            const SpectrumDataset& excited, const SpectrumPrep& exc_prep,
                            const TrapParameters& trap, const VoigtParams& widths,
                            const FitOptions& opts = {});

// Inverse-variance weighted mean and its standard error.
std::pair<double, double> weighted_average(
    std::span<const std::pair<double, double>> estimates);

}  // namespace rydion
