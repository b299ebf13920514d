// Command-line front end: synthetic data generation, fitting, Monte-Carlo
// uncertainty propagation and the end-to-end pipeline, driven by a JSON
// experiment config. Exit codes: 0 success, 2 config error, 3 numerical
// failure.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rydion/config.hpp"
#include "rydion/constants.hpp"
#include "rydion/errors.hpp"
#include "rydion/fit.hpp"
#include "rydion/io.hpp"
#include "rydion/kick.hpp"
#include "rydion/mc.hpp"
#include "rydion/pipeline.hpp"
#include "rydion/rng.hpp"

namespace {

using namespace rydion;

struct CommonArgs {
  std::string config_path;
  std::optional<std::int64_t> shots;
  std::optional<double> pol_e30;
  std::optional<double> nbar;
  std::optional<int> starts;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config JSON")->required();
  cmd->add_option("--shots", args.shots, "override shots per point");
  cmd->add_option("--pol-e30", args.pol_e30, "override state polarizability, 1e-30 C m^2/V");
  cmd->add_option("--nbar", args.nbar, "override thermal phonon number");
  cmd->add_option("--starts", args.starts, "override fit multi-start count");
}

ExperimentConfig load_with_overrides(const CommonArgs& args) {
  ExperimentConfig config = load_config(args.config_path);
  if (args.shots) {
    config.rabi_shots = *args.shots;
    config.spec_shots = *args.shots;
  }
  if (args.pol_e30) config.pol_theory_e30 = *args.pol_e30;
  if (args.nbar) {
    config.nbar_x = *args.nbar;
    config.nbar_y = *args.nbar;
  }
  if (args.starts) config.fit_starts = *args.starts;
  return config_from_json(config_to_json(config));  // revalidate after overrides
}

PhononDistribution make_dist(const ExperimentConfig& config, const std::string& kind,
                             std::optional<double> alpha) {
  if (kind == "thermal") return PhononDistribution::thermal(config.nbar_y);
  if (kind == "coherent") {
    const double a = alpha ? *alpha : kick_to_alpha(config.kick(config.kick_volts.front()));
    return PhononDistribution::coherent(a);
  }
  throw ConfigError("unknown distribution \"" + kind + "\" (thermal or coherent)");
}

void print_fit(const FitResult& fit) {
  std::printf("%-10s %14s %12s  %s\n", "parameter", "value", "sigma", "unit");
  for (const auto& p : fit.parameters)
    std::printf("%-10s %14.6g %12.3g  %s\n", p.name.c_str(), p.value, p.sigma,
                p.unit.c_str());
  std::printf("chi2 = %.6g, converged = %s, iterations = %d\n", fit.residual_norm,
              fit.converged ? "yes" : "no", fit.iterations);
}

FitOptions fit_options(const ExperimentConfig& config, std::uint64_t seed) {
  FitOptions opts;
  opts.starts = config.fit_starts;
  opts.seed = seed;
  opts.tail_mass = config.tail_mass;
  return opts;
}

int run(int argc, char** argv) {
  CLI::App app{"Rydberg-ion spectroscopy simulator and inference toolkit"};
  app.require_subcommand(1);

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "trap gradients from the configured frequencies");
  CommonArgs ca_args;
  std::string ca_out = "trap.json";
  add_common(cal, ca_args);
  cal->add_option("--out", ca_out, "output calibration JSON");

  // simulate-rabi
  auto* sim_rabi = app.add_subcommand("simulate-rabi", "synthesize a sideband Rabi scan");
  CommonArgs sr_args;
  std::uint64_t sr_seed = 0;
  int sr_sideband = 0;
  std::string sr_dist = "thermal";
  std::optional<double> sr_alpha;
  std::string sr_out = "rabi.csv";
  add_common(sim_rabi, sr_args);
  sim_rabi->add_option("--seed", sr_seed, "RNG seed")->required();
  sim_rabi->add_option("--sideband", sr_sideband, "-1 red, 0 carrier, +1 blue");
  sim_rabi->add_option("--dist", sr_dist, "thermal or coherent");
  sim_rabi->add_option("--alpha", sr_alpha, "coherent state size");
  sim_rabi->add_option("--out", sr_out, "output CSV");

  // simulate-spectrum
  auto* sim_spec = app.add_subcommand("simulate-spectrum", "synthesize an excitation spectrum");
  CommonArgs ss_args;
  std::uint64_t ss_seed = 0;
  std::string ss_dist = "thermal";
  std::optional<double> ss_alpha;
  std::string ss_out = "spectrum.csv";
  add_common(sim_spec, ss_args);
  sim_spec->add_option("--seed", ss_seed, "RNG seed")->required();
  sim_spec->add_option("--dist", ss_dist, "phonon law of the kicked radial mode");
  sim_spec->add_option("--alpha", ss_alpha, "coherent state size");
  sim_spec->add_option("--out", ss_out, "output CSV");

  // fit-thermal
  auto* fit_th = app.add_subcommand("fit-thermal", "joint thermal fit of carrier/red/blue scans");
  CommonArgs ft_args;
  std::uint64_t ft_seed = 0;
  std::string ft_carrier, ft_red, ft_blue, ft_out = "fit-thermal.json";
  add_common(fit_th, ft_args);
  fit_th->add_option("--carrier", ft_carrier, "carrier scan CSV")->required();
  fit_th->add_option("--red", ft_red, "red sideband CSV")->required();
  fit_th->add_option("--blue", ft_blue, "blue sideband CSV")->required();
  fit_th->add_option("--seed", ft_seed, "multi-start jitter seed");
  fit_th->add_option("--out", ft_out, "output JSON");

  // fit-alpha
  auto* fit_al = app.add_subcommand("fit-alpha", "coherent state size from kicked sidebands");
  CommonArgs fa_args;
  std::uint64_t fa_seed = 0;
  std::string fa_red, fa_blue, fa_thermal, fa_out = "fit-alpha.json";
  add_common(fit_al, fa_args);
  fit_al->add_option("--red", fa_red, "red sideband CSV")->required();
  fit_al->add_option("--blue", fa_blue, "blue sideband CSV")->required();
  fit_al->add_option("--thermal-fit", fa_thermal, "fit-thermal JSON (fixes omega0, gamma, A)")
      ->required();
  fit_al->add_option("--seed", fa_seed, "multi-start jitter seed");
  fit_al->add_option("--out", fa_out, "output JSON");

  // fit-pol
  auto* fit_pl = app.add_subcommand("fit-pol", "polarizability from a spectrum pair");
  CommonArgs fp_args;
  std::uint64_t fp_seed = 0;
  std::string fp_ref, fp_exc, fp_thermal, fp_alpha_fit, fp_out = "fit-pol.json";
  std::optional<double> fp_alpha;
  add_common(fit_pl, fp_args);
  fit_pl->add_option("--reference", fp_ref, "thermal reference spectrum CSV")->required();
  fit_pl->add_option("--excited", fp_exc, "kicked spectrum CSV")->required();
  fit_pl->add_option("--thermal-fit", fp_thermal, "fit-thermal JSON (fixes nbar)");
  fit_pl->add_option("--alpha-fit", fp_alpha_fit, "fit-alpha JSON (fixes |alpha|)");
  fit_pl->add_option("--alpha", fp_alpha, "fix |alpha| directly");
  fit_pl->add_option("--seed", fp_seed, "multi-start jitter seed");
  fit_pl->add_option("--out", fp_out, "output JSON");

  // mc
  auto* mc_cmd = app.add_subcommand("mc", "Monte-Carlo uncertainty of one fit problem");
  CommonArgs mc_args;
  std::uint64_t mc_seed = 0;
  std::string mc_problem = "pol";
  std::optional<int> mc_replicas;
  std::optional<double> mc_alpha;
  std::string mc_out = "mc.json";
  add_common(mc_cmd, mc_args);
  mc_cmd->add_option("--seed", mc_seed, "RNG seed")->required();
  mc_cmd->add_option("--problem", mc_problem, "thermal, alpha or pol");
  mc_cmd->add_option("--replicas", mc_replicas, "override replica count");
  mc_cmd->add_option("--alpha", mc_alpha, "nominal coherent state size");
  mc_cmd->add_option("--out", mc_out, "output JSON");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "full synthetic run with manifest");
  CommonArgs pl_args;
  std::uint64_t pl_seed = 0;
  std::string pl_out;
  add_common(pipe, pl_args);
  pipe->add_option("--seed", pl_seed, "RNG seed")->required();
  pipe->add_option("--out", pl_out, "output directory (default: timestamped)");

  // figure-data
  auto* fig = app.add_subcommand("figure-data", "re-plottable CSV for one figure kind");
  CommonArgs fg_args;
  std::string fg_kind, fg_run, fg_out = "figure.csv";
  std::vector<double> fg_sweep;
  add_common(fig, fg_args);
  fig->add_option("--kind", fg_kind,
                  "lineshape-fock-decomposition | spectrum-pair | shift-vs-alpha | "
                  "shift-vs-nbar | pol-vs-alpha")
      ->required();
  fig->add_option("--run", fg_run, "pipeline output directory (file-reading kinds)");
  fig->add_option("--sweep", fg_sweep, "sweep values (alpha or nbar kinds)")
      ->delimiter(',');
  fig->add_option("--out", fg_out, "output CSV");

  CLI11_PARSE(app, argc, argv);

  if (cal->parsed()) {
    const auto config = load_with_overrides(ca_args);
    const TrapParameters trap = config.trap();
    write_text_file(ca_out, trap_to_json(trap));
    const Polarizability pol = Polarizability::from_e30(config.pol_theory_e30);
    const ModeFrequencies ground = secular_frequencies(trap, Polarizability{0.0});
    const ModeFrequencies shifted = secular_frequencies(trap, pol);
    const ModeShifts d = line_shift_per_phonon(trap, pol);
    std::printf("wrote %s\n", ca_out.c_str());
    std::printf("gamma_rf = %.6e V/m^2, gamma_dc = %.6e V/m^2, epsilon = %.6f\n",
                trap.gamma_rf, trap.gamma_dc, trap.epsilon);
    std::printf("ground state   : %.6f %.6f %.6f MHz\n", ground.x / mhz, ground.y / mhz,
                ground.z / mhz);
    std::printf("at %.3g e-30    : %.6f %.6f %.6f MHz\n", pol.e30(), shifted.x / mhz,
                shifted.y / mhz, shifted.z / mhz);
    std::printf("shift per phonon: %.4f %.4f %.4f kHz\n", d.x / khz, d.y / khz, d.z / khz);
    std::printf("confined below %.4g e-30 C m^2/V\n", confinement_limit(trap).e30());
    return 0;
  }

  if (sim_rabi->parsed()) {
    const auto config = load_with_overrides(sr_args);
    RabiModel m = config.carrier();
    m.sideband = sr_sideband;
    const auto dist = make_dist(config, sr_dist, sr_alpha);
    const auto taus = sr_sideband == 0 ? config.carrier_taus() : config.sideband_taus();
    const auto data = simulate_dataset(m, dist, taus, config.rabi_shots, sr_seed);
    write_text_file(sr_out, rabi_to_csv(data));
    std::printf("wrote %s (%zu points, %lld shots)\n", sr_out.c_str(), data.tau.size(),
                static_cast<long long>(data.shots));
    return 0;
  }

  if (sim_spec->parsed()) {
    const auto config = load_with_overrides(ss_args);
    const ModeShifts shifts = line_shift_per_phonon(
        config.trap(), Polarizability::from_e30(config.pol_theory_e30));
    SpectrumModel model;
    model.modes = {{shifts.x, PhononDistribution::thermal(config.nbar_x)},
                   {shifts.y, make_dist(config, ss_dist, ss_alpha)}};
    model.voigt = config.widths();
    model.amplitude = config.spec_amplitude;
    model.baseline = config.spec_baseline;
    model.tail_mass = config.tail_mass;
    const auto data = simulate_spectrum(model, config.spec_grid(), config.spec_shots, ss_seed);
    write_text_file(ss_out, spectrum_to_csv(data));
    std::printf("wrote %s (%zu points, %lld shots)\n", ss_out.c_str(), data.detuning.size(),
                static_cast<long long>(data.shots));
    return 0;
  }

  if (fit_th->parsed()) {
    const auto config = load_with_overrides(ft_args);
    const auto carrier = rabi_from_csv(read_text_file(ft_carrier));
    const auto red = rabi_from_csv(read_text_file(ft_red));
    const auto blue = rabi_from_csv(read_text_file(ft_blue));
    const auto fit =
        fit_thermal_sidebands(carrier, red, blue, config.eta, fit_options(config, ft_seed));
    write_text_file(ft_out, fit_result_to_json(fit));
    print_fit(fit);
    return 0;
  }

  if (fit_al->parsed()) {
    const auto config = load_with_overrides(fa_args);
    const auto red = rabi_from_csv(read_text_file(fa_red));
    const auto blue = rabi_from_csv(read_text_file(fa_blue));
    const auto thermal = fit_result_from_json(read_text_file(fa_thermal));
    FixedRabiParams fixed;
    fixed.omega0 = thermal.value("omega0") * mhz;
    fixed.eta = config.eta;
    fixed.gamma_dec = thermal.value("gamma") / us;
    fixed.amplitude = thermal.value("amplitude");
    const auto fit = fit_coherent_alpha(red, blue, fixed, fit_options(config, fa_seed));
    write_text_file(fa_out, fit_result_to_json(fit));
    print_fit(fit);
    return 0;
  }

  if (fit_pl->parsed()) {
    const auto config = load_with_overrides(fp_args);
    const auto reference = spectrum_from_csv(read_text_file(fp_ref));
    const auto excited = spectrum_from_csv(read_text_file(fp_exc));
    double nbar = config.nbar_y;
    if (!fp_thermal.empty())
      nbar = fit_result_from_json(read_text_file(fp_thermal)).value("nbar");
    double alpha = 0.0;
    if (fp_alpha)
      alpha = *fp_alpha;
    else if (!fp_alpha_fit.empty())
      alpha = fit_result_from_json(read_text_file(fp_alpha_fit)).value("alpha");
    else
      throw ConfigError("fit-pol needs --alpha or --alpha-fit");
    const SpectrumPrep ref_prep{PhononDistribution::thermal(nbar),
                                PhononDistribution::thermal(nbar)};
    const SpectrumPrep exc_prep{PhononDistribution::thermal(nbar),
                                PhononDistribution::coherent(alpha)};
    const auto fit = fit_spectrum_pair(reference, ref_prep, excited, exc_prep, config.trap(),
                                       config.widths(), fit_options(config, fp_seed));
    write_text_file(fp_out, fit_result_to_json(fit));
    print_fit(fit);
    return 0;
  }

  if (mc_cmd->parsed()) {
    const auto config = load_with_overrides(mc_args);
    McProblem problem;
    if (mc_problem == "thermal")
      problem = McProblem::thermal_nbar;
    else if (mc_problem == "alpha")
      problem = McProblem::coherent_alpha;
    else if (mc_problem == "pol")
      problem = McProblem::polarizability;
    else
      throw ConfigError("unknown mc problem \"" + mc_problem + "\"");
    McConfig mc;
    mc.replicas = mc_replicas.value_or(config.mc_replicas > 0 ? config.mc_replicas : 1000);
    mc.seed = mc_seed;
    mc.priors = config.priors;
    mc.fit_starts = config.mc_fit_starts;
    const double alpha = mc_alpha.value_or(
        kick_to_alpha(config.kick(config.kick_volts.front())));
    const auto report =
        mc_uncertainty(problem, mc_setup_from_config(config, alpha), mc);
    write_text_file(mc_out, mc_report_to_json(report));
    std::printf("%s: replicas = %d, failures = %d, rel spread = %.4g, abs spread = %.4g\n",
                mc_problem.c_str(), report.replicas, report.failures, report.rel_spread,
                report.abs_spread);
    return 0;
  }

  if (pipe->parsed()) {
    const auto config = load_with_overrides(pl_args);
    PipelineOptions popts;
    popts.out_dir = pl_out;
    popts.seed = pl_seed;
    const auto result = run_pipeline(config, popts);
    std::printf("run %s\n", result.out_dir.string().c_str());
    std::printf("nbar = %.4g(%.2g)\n", result.thermal.value("nbar"),
                result.thermal.sigma("nbar"));
    for (std::size_t k = 0; k < result.alpha_fits.size(); ++k)
      std::printf("kick %zu: alpha = %.4g(%.2g), pol = %.4g(%.2g) 1e-30 C m^2/V\n", k + 1,
                  result.alpha_fits[k].value("alpha"), result.alpha_fits[k].sigma("alpha"),
                  result.pair_fits[k].value("pol"), result.pair_fits[k].sigma("pol"));
    std::printf("pol = %.5g(%.2g) 1e-30 C m^2/V (nominal %.4g)\n", result.pol_e30,
                result.pol_sigma, config.pol_theory_e30);
    return 0;
  }

  if (fig->parsed()) {
    const auto config = load_with_overrides(fg_args);
    emit_figure_data(figure_kind_from_string(fg_kind), config, fg_out, fg_run, fg_sweep);
    std::printf("wrote %s\n", fg_out.c_str());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
