#include "rydion/mc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rydion/constants.hpp"
#include "rydion/errors.hpp"
#include "rydion/rng.hpp"

namespace rydion {

namespace {

struct ReplicaOutcome {
  bool ok = false;
  double truth = 0.0;
  double estimate = 0.0;
  double fit_sigma = 0.0;
};

ReplicaOutcome run_thermal(const McSetup& s, const McConfig& cfg, std::uint64_t seed,
                           std::uint64_t k) {
  Rng draw = Rng::substream(seed, 4 * k + 0);
  const double eta_true =
      std::max(s.carrier.eta * (1.0 + cfg.priors.eta_rel_sd * draw.normal(0.0, 1.0)), 1e-4);
  const auto dist = PhononDistribution::thermal(s.nbar_nominal);

  RabiModel gen = s.carrier;
  gen.eta = eta_true;
  gen.sideband = 0;
  const auto carrier = simulate_dataset(gen, dist, s.carrier_taus, s.shots, draw.raw());
  gen.sideband = -1;
  const auto red = simulate_dataset(gen, dist, s.sideband_taus, s.shots, draw.raw());
  gen.sideband = +1;
  const auto blue = simulate_dataset(gen, dist, s.sideband_taus, s.shots, draw.raw());

  FitOptions fopts;
  fopts.starts = cfg.fit_starts;
  fopts.seed = draw.raw();
  const auto fit = fit_thermal_sidebands(carrier, red, blue, s.carrier.eta, fopts);
  return {true, s.nbar_nominal, fit.value("nbar"), fit.sigma("nbar")};
}

ReplicaOutcome run_alpha(const McSetup& s, const McConfig& cfg, std::uint64_t seed,
                         std::uint64_t k) {
  Rng draw = Rng::substream(seed, 4 * k + 1);
  const double eta_true =
      std::max(s.carrier.eta * (1.0 + cfg.priors.eta_rel_sd * draw.normal(0.0, 1.0)), 1e-4);
  const auto dist = PhononDistribution::coherent(s.alpha_nominal);

  RabiModel gen = s.carrier;
  gen.eta = eta_true;
  gen.sideband = -1;
  const auto red = simulate_dataset(gen, dist, s.sideband_taus, s.shots, draw.raw());
  gen.sideband = +1;
  const auto blue = simulate_dataset(gen, dist, s.sideband_taus, s.shots, draw.raw());

  // start value drawn around the nominal: alpha^2 ~ N(alpha^2, alpha)
  const double a2 =
      std::max(s.alpha_nominal * s.alpha_nominal + s.alpha_nominal * draw.normal(0.0, 1.0), 0.04);

  FixedRabiParams fixed{s.carrier.omega0, s.carrier.eta, s.carrier.gamma_dec,
                        s.carrier.amplitude};
  FitOptions fopts;
  fopts.starts = cfg.fit_starts;
  fopts.seed = draw.raw();
  fopts.init_hint = std::sqrt(a2);
  const auto fit = fit_coherent_alpha(red, blue, fixed, fopts);
  return {true, s.alpha_nominal, fit.value("alpha"), fit.sigma("alpha")};
}

ReplicaOutcome run_pol(const McSetup& s, const McConfig& cfg, std::uint64_t seed,
                       std::uint64_t k) {
  Rng draw = Rng::substream(seed, 4 * k + 2);
  const double pol_true = s.pol_nominal_e30 * draw.uniform(cfg.priors.pol_lo, cfg.priors.pol_hi);
  const double alpha_true =
      std::max(s.alpha_nominal * (1.0 + cfg.priors.alpha_rel_sd * draw.normal(0.0, 1.0)), 0.2);
  const double nbar_true =
      std::max(s.nbar_nominal * (1.0 + cfg.priors.nbar_rel_sd * draw.normal(0.0, 1.0)), 0.0);

  const auto shifts = line_shift_per_phonon(s.trap, Polarizability::from_e30(pol_true));
  SpectrumModel ref_model;
  ref_model.center = 0.0;
  ref_model.modes = {{shifts.x, PhononDistribution::thermal(nbar_true)},
                     {shifts.y, PhononDistribution::thermal(nbar_true)}};
  ref_model.voigt = s.widths;
  ref_model.amplitude = s.spec_amplitude;
  ref_model.baseline = s.spec_baseline;

  SpectrumModel exc_model = ref_model;
  exc_model.modes[1].dist = PhononDistribution::coherent(alpha_true);

  const auto ref = simulate_spectrum(ref_model, s.spec_grid, s.shots, draw.raw());
  const auto exc = simulate_spectrum(exc_model, s.spec_grid, s.shots, draw.raw());

  SpectrumPrep ref_prep{PhononDistribution::thermal(s.nbar_nominal),
                        PhononDistribution::thermal(s.nbar_nominal)};
  SpectrumPrep exc_prep{PhononDistribution::thermal(s.nbar_nominal),
                        PhononDistribution::coherent(s.alpha_nominal)};

  FitOptions fopts;
  fopts.starts = cfg.fit_starts;
  fopts.seed = draw.raw();
  const auto fit = fit_spectrum_pair(ref, ref_prep, exc, exc_prep, s.trap, s.widths, fopts);
  return {true, pol_true, fit.value("pol"), fit.sigma("pol")};
}

}  // namespace

McReport mc_uncertainty(McProblem problem, const McSetup& setup, const McConfig& config) {
  if (config.replicas < 1) throw ConfigError("mc replicas must be >= 1");

  McReport report;
  report.problem = problem;
  report.replicas = config.replicas;
  switch (problem) {
    case McProblem::thermal_nbar:
      report.nominal = setup.nbar_nominal;
      break;
    case McProblem::coherent_alpha:
      report.nominal = setup.alpha_nominal;
      break;
    case McProblem::polarizability:
      report.nominal = setup.pol_nominal_e30;
      break;
  }

  double sigma_sum = 0.0;
  for (int k = 0; k < config.replicas; ++k) {
    ReplicaOutcome out;
    try {
      switch (problem) {
        case McProblem::thermal_nbar:
          out = run_thermal(setup, config, config.seed, static_cast<std::uint64_t>(k));
          break;
        case McProblem::coherent_alpha:
          out = run_alpha(setup, config, config.seed, static_cast<std::uint64_t>(k));
          break;
        case McProblem::polarizability:
          out = run_pol(setup, config, config.seed, static_cast<std::uint64_t>(k));
          break;
      }
    } catch (const NonConvergence&) {
      out.ok = false;
    } catch (const AmbiguousFit&) {
      out.ok = false;
    }
    if (!out.ok) {
      ++report.failures;
      continue;
    }
    report.truths.push_back(out.truth);
    report.estimates.push_back(out.estimate);
    sigma_sum += out.fit_sigma;
  }

  const double failure_fraction =
      static_cast<double>(report.failures) / static_cast<double>(config.replicas);
  if (failure_fraction > config.max_failure_fraction)
    throw NonConvergence("mc aborted: " + std::to_string(report.failures) + " of " +
                         std::to_string(config.replicas) + " replicas failed to converge");

  const std::size_t n = report.estimates.size();
  double ratio_sum = 0.0, diff_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ratio_sum += report.estimates[i] / report.truths[i];
    diff_sum += report.estimates[i] - report.truths[i];
  }
  const double ratio_mean = ratio_sum / static_cast<double>(n);
  const double diff_mean = diff_sum / static_cast<double>(n);
  double ratio_var = 0.0, diff_var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dr = report.estimates[i] / report.truths[i] - ratio_mean;
    const double dd = report.estimates[i] - report.truths[i] - diff_mean;
    ratio_var += dr * dr;
    diff_var += dd * dd;
  }
  report.mean_ratio = ratio_mean;
  report.rel_spread = n > 1 ? std::sqrt(ratio_var / static_cast<double>(n - 1)) : 0.0;
  report.abs_spread = n > 1 ? std::sqrt(diff_var / static_cast<double>(n - 1)) : 0.0;
  report.mean_fit_sigma = sigma_sum / static_cast<double>(n);
  return report;
}

}  // namespace rydion
