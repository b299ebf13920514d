#include "rydion/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <string>
#include <utility>
#include <vector>

#include "rydion/constants.hpp"
#include "rydion/errors.hpp"
#include "rydion/io.hpp"
#include "rydion/kick.hpp"
#include "rydion/rng.hpp"

namespace rydion {

namespace {

using json = nlohmann::ordered_json;

// Substream ids. Data streams must stay stable across releases; fits and
// derived stages get their own block so adding a dataset never reshuffles
// the noise of existing ones.
constexpr std::uint64_t stream_thermal_carrier = 1;
constexpr std::uint64_t stream_thermal_red = 2;
constexpr std::uint64_t stream_thermal_blue = 3;
constexpr std::uint64_t stream_reference_spectrum = 4;
constexpr std::uint64_t stream_kick_base = 100;  // + 4k + {0 red, 1 blue, 2 spectrum, 3 drift}
constexpr std::uint64_t stream_fit_thermal = 8001;
constexpr std::uint64_t stream_fit_alpha_base = 8100;
constexpr std::uint64_t stream_fit_pair_base = 8200;
constexpr std::uint64_t stream_mc = 9000;

template <typename F>
decltype(auto) run_stage(const std::string& name, F&& body) {
  const auto prefix = [&](const char* what) { return "stage " + name + ": " + what; };
  try {
    return body();
  } catch (const UnconfinedTrap& e) {
    throw UnconfinedTrap(prefix(e.what()));
  } catch (const InconsistentFrequencies& e) {
    throw InconsistentFrequencies(prefix(e.what()));
  } catch (const TruncationOverflow& e) {
    throw TruncationOverflow(prefix(e.what()));
  } catch (const InvalidSideband& e) {
    throw InvalidSideband(prefix(e.what()));
  } catch (const NonConvergence& e) {
    throw NonConvergence(prefix(e.what()));
  } catch (const AmbiguousFit& e) {
    throw AmbiguousFit(prefix(e.what()));
  } catch (const ConfigError& e) {
    throw ConfigError(prefix(e.what()));
  } catch (const MissingInput& e) {
    throw MissingInput(prefix(e.what()));
  } catch (const Error& e) {
    throw Error(prefix(e.what()));
  } catch (const std::exception& e) {
    throw Error(prefix(e.what()));
  }
}

std::filesystem::path default_out_dir(std::uint64_t seed) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  return std::filesystem::path("run-" + std::string(stamp) + "-seed" + std::to_string(seed));
}

std::string kick_tag(std::size_t k) { return "kick" + std::to_string(k + 1); }

double fitted_si(const FitResult& fit, std::string_view name, double to_si) {
  return fit.value(name) * to_si;
}

SpectrumModel pair_model(const ExperimentConfig& config, const ModeShifts& shifts,
                         const PhononDistribution& y_dist, double nbar_x,
                         double center, double amplitude, double baseline) {
  SpectrumModel m;
  m.center = center;
  m.modes = {{shifts.x, PhononDistribution::thermal(nbar_x)}, {shifts.y, y_dist}};
  m.voigt = config.widths();
  m.amplitude = amplitude;
  m.baseline = baseline;
  m.tail_mass = config.tail_mass;
  return m;
}

// Shot-noise standard error of the baseline-subtracted first-moment
// estimator, by the delta method with binomial per-point variances.
double centroid_noise(const SpectrumModel& model, std::span<const double> grid,
                      std::int64_t shots) {
  const std::vector<double> y = spectrum(model, grid);
  double mass = 0.0, first = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    mass += y[i] - model.baseline;
    first += (y[i] - model.baseline) * grid[i];
  }
  if (mass <= 0.0) return 0.0;
  const double centroid = first / mass;
  double var = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double dp = (grid[i] - centroid) / mass;
    var += dp * dp * y[i] * (1.0 - y[i]) / static_cast<double>(shots);
  }
  return std::sqrt(var);
}

std::string read_run_file(const std::filesystem::path& run_dir, const std::string& name) {
  const auto path = run_dir / name;
  if (run_dir.empty() || !std::filesystem::exists(path))
    throw MissingInput("required input " + name + " not found under " + run_dir.string());
  return read_text_file(path);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i)
      text_ += header[i] + (i + 1 < header.size() ? "," : "\n");
  }

  void row(std::span<const double> values) {
    char buf[40];
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.9g", values[i]);
      text_ += buf;
      text_ += i + 1 < values.size() ? ',' : '\n';
    }
  }

  const std::string& text() const { return text_; }
  std::size_t columns() const { return columns_; }

 private:
  std::string text_;
  std::size_t columns_;
};

void write_fock_decomposition(const ExperimentConfig& config,
                              const std::filesystem::path& out_path,
                              const std::vector<double>& sweep) {
  const PhononDistribution y_dist = sweep.empty()
                                        ? PhononDistribution::thermal(config.nbar_y)
                                        : PhononDistribution::coherent(sweep.front());
  const ModeShifts shifts =
      line_shift_per_phonon(config.trap(), Polarizability::from_e30(config.pol_theory_e30));
  const auto grid = config.spec_grid();

  // Components above 0.1% weight, capped so the file stays plottable.
  const std::size_t n_lo_cap = truncation_bound(y_dist, 1e-3);
  std::vector<std::size_t> fock;
  for (std::size_t n = 0; n <= n_lo_cap && fock.size() < 24; ++n)
    if (y_dist.pmf(n) >= 1e-3) fock.push_back(n);

  std::vector<std::string> header = {"detuning_MHz", "total_probability"};
  for (std::size_t n : fock) header.push_back("fock" + std::to_string(n));
  CsvWriter csv(std::move(header));

  SpectrumModel total = pair_model(config, shifts, y_dist, config.nbar_x, 0.0,
                                   config.spec_amplitude, config.spec_baseline);
  const std::vector<double> y_total = spectrum(total, grid);

  std::vector<std::vector<double>> parts;
  for (std::size_t n : fock) {
    SpectrumModel part = total;
    part.modes[1].dist = PhononDistribution::fock(static_cast<std::int64_t>(n));
    part.baseline = 0.0;
    part.amplitude = config.spec_amplitude * y_dist.pmf(n);
    parts.push_back(spectrum(part, grid));
  }
  std::vector<double> row(2 + fock.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    row[0] = grid[i] / mhz;
    row[1] = y_total[i];
    for (std::size_t c = 0; c < parts.size(); ++c) row[2 + c] = parts[c][i];
    csv.row(row);
  }
  write_text_file(out_path, csv.text());
}

void write_spectrum_pair_figure(const ExperimentConfig& config,
                                const std::filesystem::path& out_path,
                                const std::filesystem::path& run_dir) {
  const auto reference = spectrum_from_csv(read_run_file(run_dir, "spectrum-reference.csv"));
  const auto excited = spectrum_from_csv(read_run_file(run_dir, "spectrum-kick1.csv"));
  const auto thermal = fit_result_from_json(read_run_file(run_dir, "fit-thermal.json"));
  const auto alpha = fit_result_from_json(read_run_file(run_dir, "fit-alpha-kick1.json"));
  const auto pair = fit_result_from_json(read_run_file(run_dir, "fit-pair-kick1.json"));

  const TrapParameters trap = config.trap();
  const ModeShifts shifts =
      line_shift_per_phonon(trap, Polarizability::from_e30(pair.value("pol")));
  const double nbar = thermal.value("nbar");
  const double center = pair.value("nu0") * mhz;

  SpectrumModel ref_model =
      pair_model(config, shifts, PhononDistribution::thermal(nbar), nbar, center,
                 pair.value("amp_ref"), pair.value("base_ref"));
  SpectrumModel exc_model =
      pair_model(config, shifts, PhononDistribution::coherent(alpha.value("alpha")), nbar,
                 center, pair.value("amp_exc"), pair.value("base_exc"));

  const auto ref_curve = spectrum(ref_model, reference.detuning);
  const auto exc_curve = spectrum(exc_model, excited.detuning);

  CsvWriter csv({"detuning_MHz", "reference_probability", "reference_model",
                 "excited_probability", "excited_model"});
  for (std::size_t i = 0; i < reference.detuning.size(); ++i)
    csv.row(std::vector<double>{reference.detuning[i] / mhz, reference.prob[i], ref_curve[i],
                                excited.prob[i], exc_curve[i]});
  write_text_file(out_path, csv.text());
}

void write_shift_sweep(const ExperimentConfig& config, const std::filesystem::path& out_path,
                       const std::vector<double>& sweep, bool vs_alpha) {
  const ModeShifts shifts =
      line_shift_per_phonon(config.trap(), Polarizability::from_e30(config.pol_theory_e30));
  const auto grid = config.spec_grid();

  if (vs_alpha) {
    CsvWriter csv({"alpha", "shift_MHz", "err_MHz"});
    for (double alpha : sweep) {
      SpectrumModel m = pair_model(config, shifts, PhononDistribution::coherent(alpha),
                                   config.nbar_x, 0.0, config.spec_amplitude,
                                   config.spec_baseline);
      const double shift = spectrum_centroid(m) - m.center;
      const double err = centroid_noise(m, grid, config.spec_shots);
      csv.row(std::vector<double>{alpha, shift / mhz, err / mhz});
    }
    write_text_file(out_path, csv.text());
    return;
  }

  CsvWriter csv({"nbar", "shift_x_MHz", "err_x_MHz", "shift_y_MHz", "err_y_MHz"});
  for (double nbar : sweep) {
    SpectrumModel mx = pair_model(config, shifts, PhononDistribution::fock(0), nbar, 0.0,
                                  config.spec_amplitude, config.spec_baseline);
    SpectrumModel my = pair_model(config, shifts, PhononDistribution::thermal(nbar), 0.0, 0.0,
                                  config.spec_amplitude, config.spec_baseline);
    const double sx = spectrum_centroid(mx) - mx.center;
    const double sy = spectrum_centroid(my) - my.center;
    csv.row(std::vector<double>{nbar, sx / mhz, centroid_noise(mx, grid, config.spec_shots) / mhz,
                                sy / mhz, centroid_noise(my, grid, config.spec_shots) / mhz});
  }
  write_text_file(out_path, csv.text());
}

void write_pol_vs_alpha(const std::filesystem::path& out_path,
                        const std::filesystem::path& run_dir) {
  CsvWriter csv({"alpha", "alpha_err", "pol_1e-30", "pol_err_1e-30"});
  std::size_t k = 0;
  while (true) {
    const std::string alpha_name = "fit-alpha-" + kick_tag(k) + ".json";
    if (run_dir.empty() || !std::filesystem::exists(run_dir / alpha_name)) break;
    const auto alpha = fit_result_from_json(read_run_file(run_dir, alpha_name));
    const auto pair =
        fit_result_from_json(read_run_file(run_dir, "fit-pair-" + kick_tag(k) + ".json"));
    csv.row(std::vector<double>{alpha.value("alpha"), alpha.sigma("alpha"), pair.value("pol"),
                                pair.sigma("pol")});
    ++k;
  }
  if (k == 0)
    throw MissingInput("no fit-alpha-kick*.json under " +
                       (run_dir.empty() ? std::string("(no run directory)") : run_dir.string()));
  write_text_file(out_path, csv.text());
}

}  // namespace

FigureKind figure_kind_from_string(std::string_view name) {
  if (name == "lineshape-fock-decomposition") return FigureKind::lineshape_fock_decomposition;
  if (name == "spectrum-pair") return FigureKind::spectrum_pair;
  if (name == "shift-vs-alpha") return FigureKind::shift_vs_alpha;
  if (name == "shift-vs-nbar") return FigureKind::shift_vs_nbar;
  if (name == "pol-vs-alpha") return FigureKind::pol_vs_alpha;
  throw ConfigError("unknown figure kind \"" + std::string(name) + "\"");
}

void emit_figure_data(FigureKind kind, const ExperimentConfig& config,
                      const std::filesystem::path& out_path,
                      const std::filesystem::path& run_dir, const std::vector<double>& sweep) {
  switch (kind) {
    case FigureKind::lineshape_fock_decomposition:
      write_fock_decomposition(config, out_path, sweep);
      return;
    case FigureKind::spectrum_pair:
      write_spectrum_pair_figure(config, out_path, run_dir);
      return;
    case FigureKind::shift_vs_alpha:
      write_shift_sweep(config, out_path, sweep, true);
      return;
    case FigureKind::shift_vs_nbar:
      write_shift_sweep(config, out_path, sweep, false);
      return;
    case FigureKind::pol_vs_alpha:
      write_pol_vs_alpha(out_path, run_dir);
      return;
  }
  throw ConfigError("unhandled figure kind");
}

McSetup mc_setup_from_config(const ExperimentConfig& config, double alpha_nominal) {
  McSetup setup;
  setup.shots = config.spec_shots;
  setup.carrier = config.carrier();
  setup.nbar_nominal = config.nbar_y;
  setup.alpha_nominal = alpha_nominal;
  setup.carrier_taus = config.carrier_taus();
  setup.sideband_taus = config.sideband_taus();
  setup.trap = config.trap();
  setup.widths = config.widths();
  setup.pol_nominal_e30 = config.pol_theory_e30;
  setup.spec_amplitude = config.spec_amplitude;
  setup.spec_baseline = config.spec_baseline;
  setup.spec_grid = config.spec_grid();
  return setup;
}

PipelineResult run_pipeline(const ExperimentConfig& config, const PipelineOptions& opts) {
  PipelineResult result;
  result.out_dir = opts.out_dir.empty() ? default_out_dir(opts.seed) : opts.out_dir;
  std::filesystem::create_directories(result.out_dir);

  Manifest manifest;
  const auto save = [&](const std::string& name, const std::string& content) {
    write_text_file(result.out_dir / name, content);
    manifest.record(name, content);
  };

  run_stage("configure", [&] {
    (void)config_from_json(config_to_json(config));  // validates programmatic configs
    save("config.json", config_to_json(config));
  });

  const TrapParameters trap = config.trap();
  const ModeShifts shifts =
      line_shift_per_phonon(trap, Polarizability::from_e30(config.pol_theory_e30));
  const auto carrier_taus = config.carrier_taus();
  const auto sideband_taus = config.sideband_taus();
  const auto grid = config.spec_grid();
  const std::size_t kicks = config.kick_volts.size();

  RabiDataset thermal_carrier, thermal_red, thermal_blue;
  std::vector<RabiDataset> kick_red(kicks), kick_blue(kicks);
  run_stage("generate-sidebands", [&] {
    const PhononDistribution prep = PhononDistribution::thermal(config.nbar_y);
    RabiModel m = config.carrier();
    m.sideband = 0;
    thermal_carrier = simulate_dataset(m, prep, carrier_taus, config.rabi_shots,
                                       Rng::derive_seed(opts.seed, stream_thermal_carrier));
    m.sideband = -1;
    thermal_red = simulate_dataset(m, prep, sideband_taus, config.rabi_shots,
                                   Rng::derive_seed(opts.seed, stream_thermal_red));
    m.sideband = +1;
    thermal_blue = simulate_dataset(m, prep, sideband_taus, config.rabi_shots,
                                    Rng::derive_seed(opts.seed, stream_thermal_blue));
    save("rabi-thermal-carrier.csv", rabi_to_csv(thermal_carrier));
    save("rabi-thermal-red.csv", rabi_to_csv(thermal_red));
    save("rabi-thermal-blue.csv", rabi_to_csv(thermal_blue));

    for (std::size_t k = 0; k < kicks; ++k) {
      KickModel kick = config.kick(config.kick_volts[k]);
      if (config.kick_drift_rel > 0.0) {
        Rng drift = Rng::substream(opts.seed, stream_kick_base + 4 * k + 3);
        kick.drive_freq *= 1.0 + config.kick_drift_rel * drift.normal(0.0, 1.0);
      }
      const double alpha = kick_to_alpha(kick);
      result.alpha_true.push_back(alpha);
      const PhononDistribution coh = PhononDistribution::coherent(alpha);
      m.sideband = -1;
      kick_red[k] = simulate_dataset(m, coh, sideband_taus, config.rabi_shots,
                                     Rng::derive_seed(opts.seed, stream_kick_base + 4 * k + 0));
      m.sideband = +1;
      kick_blue[k] = simulate_dataset(m, coh, sideband_taus, config.rabi_shots,
                                      Rng::derive_seed(opts.seed, stream_kick_base + 4 * k + 1));
      save("rabi-" + kick_tag(k) + "-red.csv", rabi_to_csv(kick_red[k]));
      save("rabi-" + kick_tag(k) + "-blue.csv", rabi_to_csv(kick_blue[k]));
    }
  });

  run_stage("fit-thermal", [&] {
    FitOptions fopts;
    fopts.starts = config.fit_starts;
    fopts.seed = Rng::derive_seed(opts.seed, stream_fit_thermal);
    fopts.tail_mass = config.tail_mass;
    result.thermal = fit_thermal_sidebands(thermal_carrier, thermal_red, thermal_blue,
                                           config.eta, fopts);
    save("fit-thermal.json", fit_result_to_json(result.thermal));
  });

  FixedRabiParams fixed;
  fixed.omega0 = fitted_si(result.thermal, "omega0", mhz);
  fixed.eta = config.eta;
  fixed.gamma_dec = result.thermal.value("gamma") / us;
  fixed.amplitude = result.thermal.value("amplitude");

  run_stage("fit-alpha", [&] {
    for (std::size_t k = 0; k < kicks; ++k) {
      FitOptions fopts;
      fopts.starts = config.fit_starts;
      fopts.seed = Rng::derive_seed(opts.seed, stream_fit_alpha_base + k);
      fopts.tail_mass = config.tail_mass;
      result.alpha_fits.push_back(fit_coherent_alpha(kick_red[k], kick_blue[k], fixed, fopts));
      save("fit-alpha-" + kick_tag(k) + ".json",
           fit_result_to_json(result.alpha_fits.back()));
    }
  });

  SpectrumDataset reference;
  std::vector<SpectrumDataset> excited(kicks);
  run_stage("generate-spectra", [&] {
    SpectrumModel ref = pair_model(config, shifts, PhononDistribution::thermal(config.nbar_y),
                                   config.nbar_x, 0.0, config.spec_amplitude,
                                   config.spec_baseline);
    reference = simulate_spectrum(ref, grid, config.spec_shots,
                                  Rng::derive_seed(opts.seed, stream_reference_spectrum));
    save("spectrum-reference.csv", spectrum_to_csv(reference));
    for (std::size_t k = 0; k < kicks; ++k) {
      SpectrumModel exc = ref;
      exc.modes[1].dist = PhononDistribution::coherent(result.alpha_true[k]);
      excited[k] = simulate_spectrum(exc, grid, config.spec_shots,
                                     Rng::derive_seed(opts.seed, stream_kick_base + 4 * k + 2));
      save("spectrum-" + kick_tag(k) + ".csv", spectrum_to_csv(excited[k]));
    }
  });

  run_stage("fit-pol", [&] {
    const double nbar_fit = result.thermal.value("nbar");
    const SpectrumPrep ref_prep{PhononDistribution::thermal(nbar_fit),
                                PhononDistribution::thermal(nbar_fit)};
    for (std::size_t k = 0; k < kicks; ++k) {
      const SpectrumPrep exc_prep{
          PhononDistribution::thermal(nbar_fit),
          PhononDistribution::coherent(result.alpha_fits[k].value("alpha"))};
      FitOptions fopts;
      fopts.starts = config.fit_starts;
      fopts.seed = Rng::derive_seed(opts.seed, stream_fit_pair_base + k);
      fopts.tail_mass = config.tail_mass;
      result.pair_fits.push_back(fit_spectrum_pair(reference, ref_prep, excited[k], exc_prep,
                                                   trap, config.widths(), fopts));
      save("fit-pair-" + kick_tag(k) + ".json",
           fit_result_to_json(result.pair_fits.back()));
    }
  });

  if (config.mc_replicas > 0) {
    run_stage("mc-uncertainty", [&] {
      double alpha_mean = 0.0;
      for (const auto& fit : result.alpha_fits) alpha_mean += fit.value("alpha");
      alpha_mean /= static_cast<double>(kicks);
      McConfig mc;
      mc.replicas = config.mc_replicas;
      mc.seed = Rng::derive_seed(opts.seed, stream_mc);
      mc.priors = config.priors;
      mc.fit_starts = config.mc_fit_starts;
      result.mc_pol = mc_uncertainty(McProblem::polarizability,
                                     mc_setup_from_config(config, alpha_mean), mc);
      save("mc-pol.json", mc_report_to_json(*result.mc_pol));
    });
  }

  run_stage("average", [&] {
    std::vector<std::pair<double, double>> estimates;
    for (const auto& fit : result.pair_fits)
      estimates.emplace_back(fit.value("pol"), fit.sigma("pol"));
    const auto [mean, sigma] = weighted_average(estimates);
    result.pol_e30 = mean;
    result.pol_sigma = sigma;
  });

  std::string summary;
  run_stage("report", [&] {
    json per_kick = json::array();
    for (std::size_t k = 0; k < kicks; ++k) {
      per_kick.push_back({{"alpha_true", result.alpha_true[k]},
                          {"alpha", result.alpha_fits[k].value("alpha")},
                          {"alpha_sigma", result.alpha_fits[k].sigma("alpha")},
                          {"nu0_mhz", result.pair_fits[k].value("nu0")},
                          {"pol_e30", result.pair_fits[k].value("pol")},
                          {"pol_sigma_e30", result.pair_fits[k].sigma("pol")}});
    }
    json j;
    j["state"] = config.state_label;
    j["seed"] = opts.seed;
    j["pol_nominal_e30"] = config.pol_theory_e30;
    j["nbar_fit"] = result.thermal.value("nbar");
    j["nbar_sigma"] = result.thermal.sigma("nbar");
    j["per_kick"] = per_kick;
    j["pol_e30"] = result.pol_e30;
    j["pol_sigma_e30"] = result.pol_sigma;
    if (result.mc_pol) {
      j["mc_rel_spread"] = result.mc_pol->rel_spread;
      j["mc_failures"] = result.mc_pol->failures;
    }
    summary = j.dump(2) + "\n";
    save("summary.json", summary);
  });

  run_stage("figures", [&] {
    const auto figure = [&](FigureKind kind, const std::string& name,
                            const std::vector<double>& sweep) {
      emit_figure_data(kind, config, result.out_dir / name, result.out_dir, sweep);
      manifest.record(name, read_text_file(result.out_dir / name));
    };
    std::vector<double> alphas, nbars;
    for (double a = 0.5; a <= 11.0 + 1e-9; a += 0.5) alphas.push_back(a);
    for (double n = 0.0; n <= 5.0 + 1e-9; n += 0.25) nbars.push_back(n);
    figure(FigureKind::lineshape_fock_decomposition, "figure-lineshape-fock.csv", {});
    figure(FigureKind::spectrum_pair, "figure-spectrum-pair.csv", {});
    figure(FigureKind::shift_vs_alpha, "figure-shift-vs-alpha.csv", alphas);
    figure(FigureKind::shift_vs_nbar, "figure-shift-vs-nbar.csv", nbars);
    figure(FigureKind::pol_vs_alpha, "figure-pol-vs-alpha.csv", {});
  });

  result.manifest_json = manifest.to_json(summary);
  write_text_file(result.out_dir / "manifest.json", result.manifest_json);
  return result;
}

}  // namespace rydion
