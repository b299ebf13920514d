#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rydion/kick.hpp"
#include "rydion/lineshape.hpp"
#include "rydion/mc.hpp"
#include "rydion/rabi.hpp"
#include "rydion/trap.hpp"

namespace rydion {

// One synthetic experiment, as read from JSON. Fields keep their file units
// (MHz, us, mV-free volts, 1e-30 C m^2/V) so load -> save -> load is the
// identity; the accessors below convert to SI at the point of use.
struct ExperimentConfig {
  // trap
  double freq_x_mhz = 2.16;
  double freq_y_mhz = 1.8;
  double freq_z_mhz = 1.05;
  double rf_drive_mhz = 14.11;
  double mass_u = 39.96204228;

  // Rydberg state
  std::string state_label = "57S";
  int principal_n = 57;
  double pol_theory_e30 = 3.68;

  // lineshape widths
  double gauss_sigma_mhz = 0.390435;
  double lorentz_fwhm_mhz = 2.0;

  // sideband drive. The carrier flops in microseconds while first-sideband
  // couplings are eta ~ 0.05 slower, so the two scans get separate windows.
  double rabi_omega0_mhz = 0.1;  // linear MHz, n = 0 carrier
  double eta = 0.051084;
  double gamma_per_us = 0.005;
  double rabi_amplitude = 0.95;
  double carrier_tau_max_us = 40.0;
  int carrier_tau_points = 48;
  double sideband_tau_max_us = 160.0;
  int sideband_tau_points = 64;
  std::int64_t rabi_shots = 100;

  // spectroscopy scan
  double grid_from_mhz = -14.0;
  double grid_to_mhz = 4.0;
  int grid_points = 96;
  std::int64_t spec_shots = 100;
  double spec_amplitude = 0.45;
  double spec_baseline = 0.02;

  // motional preparation
  double nbar_x = 0.4;
  double nbar_y = 0.4;
  double kick_kappa_per_vs = 4.870588e6;
  double kick_cycles = 100.0;
  double kick_drive_mhz = 1.8;
  double kick_drift_rel = 0.0;  // per-run relative drive-frequency drift sd
  std::vector<double> kick_volts = {0.014, 0.0222, 0.0296, 0.037};

  // uncertainty propagation
  int mc_replicas = 0;  // 0 skips the pipeline MC stage
  int mc_fit_starts = 2;
  McPriors priors;

  // fitting
  int fit_starts = 4;
  double tail_mass = 1e-6;

  // derived, SI
  TrapParameters trap() const;
  VoigtParams widths() const;
  std::vector<double> carrier_taus() const;   // (0, max], linear
  std::vector<double> sideband_taus() const;  // (0, max], linear
  std::vector<double> spec_grid() const;      // inclusive linear grid, rad/s
  RabiModel carrier() const;                  // sideband 0
  KickModel kick(double volts) const;         // resonant drive on the y mode
};

ExperimentConfig config_from_json(std::string_view json_text);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace rydion
