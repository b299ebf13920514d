// End-to-end acceptance checks against the published reference numbers.
// Each criterion prints exactly one line, "criterion N <label>: PASS|FAIL",
// and ctest matches that line, so a crashed or skipped case cannot pass.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "rydion/config.hpp"
#include "rydion/constants.hpp"
#include "rydion/fit.hpp"
#include "rydion/io.hpp"
#include "rydion/kick.hpp"
#include "rydion/lineshape.hpp"
#include "rydion/mc.hpp"
#include "rydion/phonon.hpp"
#include "rydion/pipeline.hpp"
#include "rydion/rabi.hpp"
#include "rydion/trap.hpp"

using namespace rydion;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  std::string label;
  bool ok = true;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void expect(bool cond, const std::string& what) {
    if (!cond) ok = false;
    CHECK_MESSAGE(cond, what);
  }
  void fail(const std::string& what) { expect(false, what); }
  double elapsed_s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  ~Criterion() {
    std::printf("criterion %d %s: %s [%.1f s]\n", id, label.c_str(), ok ? "PASS" : "FAIL",
                elapsed_s());
    std::fflush(stdout);
  }
};

fs::path config_dir() { return fs::path(RYDION_CONFIG_DIR); }

fs::path scratch(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / ("rydion-acceptance-" + tag);
  fs::remove_all(dir);
  return dir;
}

// reference pmfs written straight from the distribution definitions, kept
// separate from the library's stabilized evaluations
std::vector<double> geometric_pmf(double nbar, int count) {
  std::vector<double> p(count);
  for (int n = 0; n < count; ++n)
    p[n] = std::exp(n * std::log(nbar) - (n + 1) * std::log(nbar + 1.0));
  return p;
}

std::vector<double> poisson_pmf(double mean, int count) {
  std::vector<double> p(count);
  for (int n = 0; n < count; ++n)
    p[n] = std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
  return p;
}

SpectrumModel spectrum_model(const TrapParameters& trap, double pol, const VoigtParams& widths,
                             PhononDistribution x, PhononDistribution y, double amplitude,
                             double baseline) {
  const ModeShifts d = line_shift_per_phonon(trap, Polarizability::from_e30(pol));
  SpectrumModel m;
  m.modes = {{d.x, std::move(x)}, {d.y, std::move(y)}};
  m.voigt = widths;
  m.amplitude = amplitude;
  m.baseline = baseline;
  return m;
}

}  // namespace

TEST_CASE("criterion 1: secular frequencies match an independent evaluation") {
  Criterion crit{1, "secular frequency grid"};
  try {
    const double e = elementary_charge;
    const double mass = ca40_ion_mass_kg;
    const double drive = 14.11 * mhz;
    const TrapParameters base =
        calibrate_gradients(2.16 * mhz, 1.8 * mhz, 1.05 * mhz, drive, mass);

    int points = 0;
    double worst = 0.0;
    for (int a = 0; a < 5; ++a) {
      for (int b = 0; b < 4; ++b) {
        for (int c = 0; c < 5; ++c) {
          TrapParameters trap = base;
          trap.gamma_rf = base.gamma_rf * (0.9 + 0.05 * a);
          trap.gamma_dc = base.gamma_dc * (0.85 + 0.15 * b);
          trap.epsilon = -1.2 + 0.5 * c;
          const double frac = 0.3 * ((a + b + c) % 4);
          const Polarizability pol{frac * confinement_limit(trap).si};

          // scalar transcription of the stiffness-shifted radicands
          const double gp = trap.gamma_dc * (1.0 + trap.epsilon);
          const double gm = trap.gamma_dc * (1.0 - trap.epsilon);
          const double pseudo =
              2.0 * e * e * trap.gamma_rf * trap.gamma_rf / (mass * mass * drive * drive);
          const double wx = std::sqrt(pseudo - 2.0 * e * gp / mass -
                                      2.0 * pol.si *
                                          (trap.gamma_rf * trap.gamma_rf + gp * gp) / mass);
          const double wy = std::sqrt(pseudo - 2.0 * e * gm / mass -
                                      2.0 * pol.si *
                                          (trap.gamma_rf * trap.gamma_rf + gm * gm) / mass);
          const double wz =
              std::sqrt(4.0 * e * trap.gamma_dc / mass -
                        16.0 * pol.si * trap.gamma_dc * trap.gamma_dc / mass);

          const ModeFrequencies f = secular_frequencies(trap, pol);
          worst = std::max({worst, std::abs(f.x - wx) / wx, std::abs(f.y - wy) / wy,
                            std::abs(f.z - wz) / wz});
          ++points;
        }
      }
    }
    crit.expect(points == 100, "grid covers 100 points");
    crit.expect(worst <= 1e-12,
                "worst relative deviation " + std::to_string(worst) + " <= 1e-12");
    crit.expect(crit.elapsed_s() < 1.0, "runtime under 1 s");
  } catch (const std::exception& e) {
    crit.fail(std::string("unexpected error: ") + e.what());
  }
}

TEST_CASE("criterion 2: gradient calibration round-trips the frequencies") {
  Criterion crit{2, "calibration round trip"};
  try {
    const double fx = 2.16 * mhz, fy = 1.8 * mhz, fz = 1.05 * mhz;
    const TrapParameters trap =
        calibrate_gradients(fx, fy, fz, 14.11 * mhz, ca40_ion_mass_kg);
    const ModeFrequencies f = secular_frequencies(trap, Polarizability{0.0});
    crit.expect(std::abs(f.x - fx) / fx <= 1e-12, "x frequency round-trips");
    crit.expect(std::abs(f.y - fy) / fy <= 1e-12, "y frequency round-trips");
    crit.expect(std::abs(f.z - fz) / fz <= 1e-12, "z frequency round-trips");
    crit.expect(crit.elapsed_s() < 1.0, "runtime under 1 s");
  } catch (const std::exception& e) {
    crit.fail(std::string("unexpected error: ") + e.what());
  }
}

TEST_CASE("criterion 3: centroid equals the occupation-weighted closed form") {
  Criterion crit{3, "centroid identities"};
  try {
    const ExperimentConfig config;
    const TrapParameters trap = config.trap();
    const ModeShifts d = line_shift_per_phonon(trap, Polarizability::from_e30(3.68));

    struct Case {
      PhononDistribution x, y;
      double mean_x, mean_y;
      std::vector<double> px, py;
    };
    const auto thermal = [&](double nbar) {
      const int count = static_cast<int>(60.0 * (nbar + 1.0));
      return std::pair{PhononDistribution::thermal(nbar), geometric_pmf(nbar, count)};
    };
    const auto coherent = [&](double alpha) {
      const double mean = alpha * alpha;
      const int count = static_cast<int>(mean + 20.0 * std::sqrt(mean) + 30.0);
      return std::pair{PhononDistribution::coherent(alpha), poisson_pmf(mean, count)};
    };

    std::vector<Case> cases;
    {
      auto [tx, px] = thermal(0.4);
      auto [ty, py] = thermal(10.0);
      cases.push_back({tx, ty, 0.4, 10.0, px, py});
    }
    {
      auto [tx, px] = thermal(0.4);
      auto [cy, py] = coherent(12.0);
      cases.push_back({tx, cy, 0.4, 144.0, px, py});
    }
    {
      auto [tx, px] = thermal(3.0);
      auto [cy, py] = coherent(6.0);
      cases.push_back({tx, cy, 3.0, 36.0, px, py});
    }
    {
      auto [cx, px] = coherent(2.4);
      auto [ty, py] = thermal(5.0);
      cases.push_back({cx, ty, 5.76, 5.0, px, py});
    }
    {
      auto [tx, px] = thermal(10.0);
      auto [cy, py] = coherent(12.0);
      cases.push_back({tx, cy, 10.0, 144.0, px, py});
    }

    for (std::size_t i = 0; i < cases.size(); ++i) {
      const Case& c = cases[i];
      SpectrumModel model =
          spectrum_model(trap, 3.68, config.widths(), c.x, c.y, 0.45, 0.02);
      model.tail_mass = 1e-9;
      model.max_terms = 4000000;

      const double closed = c.mean_x * d.x + c.mean_y * d.y;
      const double centroid = spectrum_centroid(model) - model.center;

      // brute-force first moment of the joint occupation law
      double mass = 0.0, moment = 0.0;
      for (std::size_t nx = 0; nx < c.px.size(); ++nx) {
        for (std::size_t ny = 0; ny < c.py.size(); ++ny) {
          const double w = c.px[nx] * c.py[ny];
          mass += w;
          moment += w * (static_cast<double>(nx) * d.x + static_cast<double>(ny) * d.y);
        }
      }
      const double brute = moment / mass;

      const std::string tag = "case " + std::to_string(i);
      crit.expect(std::abs(centroid - closed) <= 1e-5 * std::abs(closed),
                  tag + ": centroid matches the closed form");
      crit.expect(std::abs(centroid - brute) <= 1e-5 * std::abs(brute),
                  tag + ": centroid matches the brute-force sum");
    }
    crit.expect(crit.elapsed_s() < 10.0, "runtime under 10 s");
  } catch (const std::exception& e) {
    crit.fail(std::string("unexpected error: ") + e.what());
  }
}

TEST_CASE("criterion 4: relative shift ladder within the measured error bars") {
  Criterion crit{4, "shift ladder"};
  try {
    const ExperimentConfig config;
    const TrapParameters trap = config.trap();
    const VoigtParams widths = config.widths();
    const double nbar_ref = 0.4;
    const double alphas[] = {2.4, 3.8, 6.0};
    const double measured_mhz[] = {-0.36, -1.06, -2.56};
    // measured error bars widened by the kick-size uncertainty propagated
    // through the quadratic shift, plus the synthetic fit spread
    const double tol_mhz[] = {0.30235487, 0.42934282, 0.88721796};

    const ModeShifts d = line_shift_per_phonon(trap, Polarizability::from_e30(3.68));
    const auto grid = config.spec_grid();
    const PhononDistribution ref_x = PhononDistribution::thermal(nbar_ref);
    const SpectrumModel ref_model =
        spectrum_model(trap, 3.68, widths, ref_x, ref_x, 0.45, 0.02);
    const SpectrumDataset ref_data = simulate_spectrum(ref_model, grid, 100000, 41);
    const SpectrumPrep ref_prep{ref_x, ref_x};

    for (int i = 0; i < 3; ++i) {
      const double a = alphas[i];
      const double occupation = a * a - nbar_ref;

      // two model routes for the noiseless relative shift: the per-phonon
      // frequency pull and the first moment of the full lineshape
      const double pull_mhz = d.y * occupation / mhz;
      SpectrumModel exc_model = spectrum_model(trap, 3.68, widths, ref_x,
                                               PhononDistribution::coherent(a), 0.45, 0.02);
      SpectrumModel quiet_ref = ref_model;
      exc_model.tail_mass = quiet_ref.tail_mass = 1e-11;
      exc_model.max_terms = quiet_ref.max_terms = 4000000;
      const double centroid_mhz =
          (spectrum_centroid(exc_model) - spectrum_centroid(quiet_ref)) / mhz;
      crit.expect(std::abs(pull_mhz - centroid_mhz) <= 1e-9 * std::abs(pull_mhz),
                  "rung " + std::to_string(i) + ": pull and centroid routes agree");

      // simulate-then-fit route against the measured ladder
      exc_model.tail_mass = 1e-6;
      exc_model.max_terms = 1000000;
      const SpectrumDataset exc_data =
          simulate_spectrum(exc_model, grid, 100000, 42 + static_cast<std::uint64_t>(i));
      const SpectrumPrep exc_prep{ref_x, PhononDistribution::coherent(a)};
      FitOptions opts;
      opts.starts = 2;
      opts.seed = 11 + static_cast<std::uint64_t>(i);
      const FitResult fit =
          fit_spectrum_pair(ref_data, ref_prep, exc_data, exc_prep, trap, widths, opts);
      const double fitted_shift_mhz =
          line_shift_per_phonon(trap, Polarizability::from_e30(fit.value("pol"))).y *
          occupation / mhz;
      crit.expect(fit.converged, "rung " + std::to_string(i) + ": pair fit converged");
      crit.expect(std::abs(fitted_shift_mhz - measured_mhz[i]) < tol_mhz[i],
                  "rung " + std::to_string(i) + ": fitted shift " +
                      std::to_string(fitted_shift_mhz) + " MHz within " +
                      std::to_string(tol_mhz[i]) + " of " + std::to_string(measured_mhz[i]));
    }
    crit.expect(crit.elapsed_s() < 120.0, "runtime under 2 min");
  } catch (const std::exception& e) {
    crit.fail(std::string("unexpected error: ") + e.what());
  }
}

TEST_CASE("criterion 5: pipeline recovers each state inside the measured interval") {
  Criterion crit{5, "pipeline interval coverage"};
  try {
    const struct {
      const char* file;
      double lo, hi;
    } states[] = {
        {"49S.json", 1.1, 1.5},
        {"53S.json", 2.0, 2.4},
        {"57S.json", 3.4, 3.8},
    };
    const auto dir = scratch("coverage");
    for (const auto& state : states) {
      const ExperimentConfig config = load_config(config_dir() / state.file);
      int inside = 0;
      for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto run_dir = dir / (std::string(state.file) + "-" + std::to_string(seed));
        const PipelineResult run = run_pipeline(config, {run_dir, seed});
        if (run.pol_e30 >= state.lo && run.pol_e30 <= state.hi) ++inside;
        fs::remove_all(run_dir);
      }
      crit.expect(inside >= 45, std::string(state.file) + " coverage " +
                                    std::to_string(inside) + "/50 >= 45");
    }
    fs::remove_all(dir);
    crit.expect(crit.elapsed_s() < 600.0, "runtime under 10 min");
  } catch (const std::exception& e) {
    crit.fail(std::string("unexpected error: ") + e.what());
  }
}

TEST_CASE("criterion 6: replica spreads live inside the published budgets") {
  Criterion crit{6, "mc spread budgets"};
  try {
    const ExperimentConfig c57 = load_config(config_dir() / "57S.json");

    McConfig mc;
    mc.replicas = 1000;
    mc.fit_starts = c57.mc_fit_starts;
    mc.priors = c57.priors;

    mc.seed = 301;
    const double alpha6 = kick_to_alpha(c57.kick(c57.kick_volts[1]));
    const McReport alpha_report =
        mc_uncertainty(McProblem::coherent_alpha, mc_setup_from_config(c57, alpha6), mc);
    crit.expect(alpha_report.rel_spread >= 0.05 && alpha_report.rel_spread <= 0.11,
                "alpha relative spread " + std::to_string(alpha_report.rel_spread) +
                    " in [0.05, 0.11]");

    const double alpha_front = kick_to_alpha(c57.kick(c57.kick_volts.front()));
    mc.seed = 313;
    const McReport pol57 =
        mc_uncertainty(McProblem::polarizability, mc_setup_from_config(c57, alpha_front), mc);
    crit.expect(pol57.rel_spread >= 0.10 && pol57.rel_spread <= 0.18,
                "pol relative spread " + std::to_string(pol57.rel_spread) +
                    " in [0.10, 0.18]");

    const ExperimentConfig c49 = load_config(config_dir() / "49S.json");
    const ExperimentConfig c53 = load_config(config_dir() / "53S.json");
    mc.seed = 311;
    const McReport pol49 = mc_uncertainty(
        McProblem::polarizability,
        mc_setup_from_config(c49, kick_to_alpha(c49.kick(c49.kick_volts.front()))), mc);
    mc.seed = 312;
    const McReport pol53 = mc_uncertainty(
        McProblem::polarizability,
        mc_setup_from_config(c53, kick_to_alpha(c53.kick(c53.kick_volts.front()))), mc);
    crit.expect(pol49.abs_spread < pol53.abs_spread && pol53.abs_spread < pol57.abs_spread,
                "absolute pol spread grows with the nominal value: " +
                    std::to_string(pol49.abs_spread) + " < " +
                    std::to_string(pol53.abs_spread) + " < " +
                    std::to_string(pol57.abs_spread));
    crit.expect(crit.elapsed_s() < 900.0, "runtime under 15 min");
  } catch (const std::exception& e) {
    crit.fail(std::string("unexpected error: ") + e.what());
  }
}

TEST_CASE("criterion 7: couplings match displacement-operator matrix elements") {
  Criterion crit{7, "displacement oracle"};
  try {
    const int n_max = 300;
    const int dim = 460;  // truncation margin beyond the probed levels
    double worst = 0.0;

    for (const double eta : {0.051084, 0.1, 0.3}) {
      Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, dim);
      for (int i = 0; i + 1 < dim; ++i)
        x(i, i + 1) = x(i + 1, i) = std::sqrt(static_cast<double>(i + 1));
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
      Eigen::VectorXcd phases(dim);
      for (int k = 0; k < dim; ++k)
        phases[k] = std::exp(std::complex<double>(0.0, eta * es.eigenvalues()[k]));
      const Eigen::MatrixXcd disp =
          es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().transpose();

      for (int n = 0; n <= n_max; ++n) {
        for (int s = -2; s <= 2; ++s) {
          if (n + s < 0) continue;
          const double oracle = std::abs(disp(n + s, n));
          const double lib = std::abs(rabi_frequency(n, s, 1.0, eta));
          const double denom = std::max(oracle, lib);
          if (denom < 1e-12) continue;  // both numerically zero
          worst = std::max(worst, std::abs(oracle - lib) / denom);
        }
      }
    }
    crit.expect(worst <= 1e-8,
                "worst relative deviation " + std::to_string(worst) + " <= 1e-8");
    crit.expect(crit.elapsed_s() < 30.0, "runtime under 30 s");
  } catch (const std::exception& e) {
    crit.fail(std::string("unexpected error: ") + e.what());
  }
}

TEST_CASE("criterion 8: fitted polarizabilities follow the n^7 scaling") {
  Criterion crit{8, "scaling law"};
  try {
    const char* files[] = {"49S.json", "53S.json", "57S.json"};
    const auto dir = scratch("scaling");
    std::vector<double> log_n, log_pol;
    double pol_lo_theory = 0.0, pol_hi_theory = 0.0;
    int n_lo = 0, n_hi = 0;
    for (const char* file : files) {
      const ExperimentConfig config = load_config(config_dir() / file);
      const PipelineResult run = run_pipeline(config, {dir / file, 11});
      crit.expect(run.pol_e30 > 0.0, std::string(file) + " recovered a positive value");
      log_n.push_back(std::log(static_cast<double>(config.principal_n)));
      log_pol.push_back(std::log(run.pol_e30));
      if (config.principal_n == 49) {
        pol_lo_theory = config.pol_theory_e30;
        n_lo = config.principal_n;
      }
      if (config.principal_n == 57) {
        pol_hi_theory = config.pol_theory_e30;
        n_hi = config.principal_n;
      }
    }
    fs::remove_all(dir);

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(log_n.size());
    for (std::size_t i = 0; i < log_n.size(); ++i) {
      sx += log_n[i];
      sy += log_pol[i];
      sxx += log_n[i] * log_n[i];
      sxy += log_n[i] * log_pol[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    crit.expect(slope >= 6.0 && slope <= 8.0,
                "fitted exponent " + std::to_string(slope) + " within 7 +- 1");

    const double ratio = pol_hi_theory / pol_lo_theory;
    const double scaling =
        std::pow(static_cast<double>(n_hi) / static_cast<double>(n_lo), 7.0);
    crit.expect(std::abs(ratio / scaling - 1.0) <= 0.05,
                "theory ratio " + std::to_string(ratio) + " matches (57/49)^7 = " +
                    std::to_string(scaling) + " within 5%");
  } catch (const std::exception& e) {
    crit.fail(std::string("unexpected error: ") + e.what());
  }
}

TEST_CASE("criterion 9: fixed-seed runs produce byte-identical manifests") {
  Criterion crit{9, "manifest determinism"};
  try {
    const ExperimentConfig config;
    const auto dir_a = scratch("det-a");
    const auto dir_b = scratch("det-b");
    const PipelineResult a = run_pipeline(config, {dir_a, 4});
    const PipelineResult b = run_pipeline(config, {dir_b, 4});
    const std::string file_a = read_text_file(dir_a / "manifest.json");
    const std::string file_b = read_text_file(dir_b / "manifest.json");
    crit.expect(a.manifest_json == file_a, "first run returns its manifest verbatim");
    crit.expect(file_a == file_b, "manifests are byte-identical across runs");
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    crit.expect(crit.elapsed_s() < 120.0, "runtime bounded by two pipeline runs");
  } catch (const std::exception& e) {
    crit.fail(std::string("unexpected error: ") + e.what());
  }
}
