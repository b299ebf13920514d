#include "rydion/lineshape.hpp"

#include <cmath>
#include <string>

#include "rydion/constants.hpp"
#include "rydion/errors.hpp"
#include "rydion/faddeeva.hpp"
#include "rydion/rng.hpp"

namespace rydion {

namespace {

constexpr double sqrt2 = 1.4142135623730951;
constexpr double inv_sqrt_2pi = 0.3989422804014327;

void validate(const VoigtParams& p) {
  if (!(p.sigma >= 0.0) || !(p.gamma_l >= 0.0) || (p.sigma == 0.0 && p.gamma_l == 0.0))
    throw ConfigError("voigt widths must be >= 0 and not both zero");
}

}  // namespace

double voigt_profile(double omega, double center, const VoigtParams& params) {
  validate(params);
  const double d = omega - center;
  if (params.sigma == 0.0) {
    // pure Lorentzian with FWHM gamma_l
    const double hwhm = 0.5 * params.gamma_l;
    return hwhm / (pi * (d * d + hwhm * hwhm));
  }
  const double inv = 1.0 / (params.sigma * sqrt2);
  return faddeeva_real(d * inv, 0.5 * params.gamma_l * inv) * inv_sqrt_2pi / params.sigma;
}

double voigt_peak(const VoigtParams& params) {
  validate(params);
  if (params.sigma == 0.0) return 2.0 / (pi * params.gamma_l);
  return erfcx(0.5 * params.gamma_l / (params.sigma * sqrt2)) * inv_sqrt_2pi / params.sigma;
}

std::vector<SpectralLine> line_list(const SpectrumModel& model) {
  if (model.modes.empty()) return {SpectralLine{0.0, 1.0}};

  std::vector<std::vector<double>> pmfs;
  std::size_t joint = 1;
  for (const auto& mode : model.modes) {
    const int n_max = truncation_bound(mode.dist, model.tail_mass);
    std::vector<double> p(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) p[static_cast<std::size_t>(n)] = mode.dist.pmf(n);
    joint *= p.size();
    if (joint > model.max_terms)
      throw TruncationOverflow("joint phonon support " + std::to_string(joint) + " exceeds cap " +
                               std::to_string(model.max_terms) +
                               "; coarsen tail_mass or drop a mode");
    pmfs.push_back(std::move(p));
  }

  const double prune = model.tail_mass / static_cast<double>(joint);
  std::vector<SpectralLine> lines;
  lines.reserve(joint);
  std::vector<std::size_t> idx(model.modes.size(), 0);
  for (;;) {
    double w = 1.0;
    double offset = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      w *= pmfs[i][idx[i]];
      offset += static_cast<double>(idx[i]) * model.modes[i].delta_omega;
    }
    if (w >= prune) lines.push_back(SpectralLine{offset, w});
    std::size_t i = 0;
    while (i < idx.size() && ++idx[i] == pmfs[i].size()) idx[i++] = 0;
    if (i == idx.size()) break;
  }
  return lines;
}

std::vector<double> spectrum(const SpectrumModel& model, std::span<const double> grid) {
  const auto lines = line_list(model);
  const double peak = voigt_peak(model.voigt);
  std::vector<double> out(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (const auto& line : lines)
      acc += line.weight * voigt_profile(grid[g] - line.offset, model.center, model.voigt);
    out[g] = model.baseline + model.amplitude * acc / peak;
  }
  return out;
}

double spectrum_centroid(const SpectrumModel& model) {
  // Each component is symmetric about its own center, so the mixture first
  // moment is the weight-averaged line position.
  double wsum = 0.0, moment = 0.0;
  for (const auto& line : line_list(model)) {
    wsum += line.weight;
    moment += line.weight * line.offset;
  }
  return model.center + moment / wsum;
}

SpectrumDataset simulate_spectrum(const SpectrumModel& model, std::span<const double> grid,
                                  std::int64_t shots, std::uint64_t seed) {
  if (shots < 1) throw ConfigError("shots must be >= 1");
  const auto probs = spectrum(model, grid);
  SpectrumDataset data;
  data.detuning.assign(grid.begin(), grid.end());
  data.prob.resize(grid.size());
  data.shots = shots;
  Rng rng(seed);
  for (std::size_t i = 0; i < probs.size(); ++i)
    data.prob[i] =
        static_cast<double>(rng.binomial(shots, probs[i])) / static_cast<double>(shots);
  return data;
}

}  // namespace rydion
