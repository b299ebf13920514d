#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rydion/phonon.hpp"

namespace rydion {

// Voigt widths in rad/s: sigma is the Gaussian standard deviation (Doppler
// plus axial thermal motion), gamma_l the Lorentzian FWHM (laser linewidths
// plus natural width). At most one of the two may be zero.
struct VoigtParams {
  double sigma = 0.0;
  double gamma_l = 0.0;
};

// One motional mode entering the spectrum: per-phonon line shift and the
// phonon-number law weighting the shifted components.
struct ModeSpec {
  double delta_omega = 0.0;  // rad/s per phonon
  PhononDistribution dist = PhononDistribution::fock(0);
};

// Excitation spectrum model: a phonon-weighted mixture of Voigt profiles.
// Each joint occupation (n_1 .. n_k) contributes one line at
// center + sum_i n_i * delta_omega_i with weight prod_i P(n_i). Lines are
// peak-normalized, so amplitude is the height of a single unshifted
// component, not its area. The axial mode is normally folded into sigma
// rather than listed as a mode; listing it as a third mode is allowed.
struct SpectrumModel {
  double center = 0.0;  // rad/s
  std::vector<ModeSpec> modes;
  VoigtParams voigt;
  double amplitude = 1.0;      // peak depopulation probability, (0, 1]
  double baseline = 0.0;       // [0, 1)
  double tail_mass = 1e-6;     // per-mode truncation bound
  std::size_t max_terms = 1000000;
};

// Area-normalized Voigt density. Exact Gaussian and Lorentzian limits when
// one width is zero; symmetric about center to machine precision.
double voigt_profile(double omega, double center, const VoigtParams& params);

// Density at the line center (the mixture normalizer).
double voigt_peak(const VoigtParams& params);

// One spectral component of the joint enumeration.
struct SpectralLine {
  double offset = 0.0;  // from model center, rad/s
  double weight = 0.0;  // joint phonon probability
};

// Joint enumeration over the truncated supports of all modes, pruning
// weights below tail_mass / (joint support size). Weights sum to 1 up to
// truncation. Throws TruncationOverflow when the joint support exceeds
// max_terms.
std::vector<SpectralLine> line_list(const SpectrumModel& model);

// baseline + amplitude * sum_l w_l * V(omega - center - offset_l) / V_peak
std::vector<double> spectrum(const SpectrumModel& model, std::span<const double> grid);

// First moment of the baseline-subtracted spectrum. Equals
// center + sum_i mean(dist_i) * delta_omega_i up to truncation error,
// which makes the shift linear in nbar and quadratic in |alpha|.
double spectrum_centroid(const SpectrumModel& model);

// Measured spectrum: per-point binomial shot statistics on the model.
struct SpectrumDataset {
  std::vector<double> detuning;  // rad/s, relative to the scan reference
  std::vector<double> prob;
  std::int64_t shots = 0;
};

SpectrumDataset simulate_spectrum(const SpectrumModel& model, std::span<const double> grid,
                                  std::int64_t shots, std::uint64_t seed);

}  // namespace rydion
