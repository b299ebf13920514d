#include "rydion/config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <set>

#include "rydion/constants.hpp"
#include "rydion/errors.hpp"
#include "rydion/io.hpp"

namespace rydion {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& j, const std::string& context,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(context + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.contains(key))
      throw ConfigError(context + ": unknown key \"" + key + "\"");
  }
}

double get_number(const json& j, const std::string& context,
                  const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw ConfigError(context + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

std::int64_t get_integer(const json& j, const std::string& context,
                         const std::string& key, std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    throw ConfigError(context + "." + key + ": expected an integer");
  return j.at(key).get<std::int64_t>();
}

void require_positive(double value, const std::string& name) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw ConfigError(name + " must be positive and finite");
}

void require_in(double value, double lo, double hi, const std::string& name) {
  if (!(value >= lo && value <= hi) || !std::isfinite(value))
    throw ConfigError(name + " must lie in [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
}

void validate(const ExperimentConfig& c) {
  require_positive(c.freq_x_mhz, "trap.frequencies_mhz.x");
  require_positive(c.freq_y_mhz, "trap.frequencies_mhz.y");
  require_positive(c.freq_z_mhz, "trap.frequencies_mhz.z");
  require_positive(c.rf_drive_mhz, "trap.rf_drive_mhz");
  require_positive(c.mass_u, "trap.mass_u");
  if (c.principal_n < 1) throw ConfigError("state.principal_n must be >= 1");
  require_positive(c.pol_theory_e30, "state.pol_theory_e30");
  if (c.gauss_sigma_mhz < 0.0 || !std::isfinite(c.gauss_sigma_mhz))
    throw ConfigError("laser.gauss_sigma_mhz must be >= 0");
  require_positive(c.lorentz_fwhm_mhz, "laser.lorentz_fwhm_mhz");
  require_positive(c.rabi_omega0_mhz, "rabi.omega0_mhz");
  require_in(c.eta, 1e-6, 1.0, "rabi.eta");
  if (c.gamma_per_us < 0.0 || !std::isfinite(c.gamma_per_us))
    throw ConfigError("rabi.gamma_per_us must be >= 0");
  require_in(c.rabi_amplitude, 1e-3, 1.0, "rabi.amplitude");
  require_positive(c.carrier_tau_max_us, "rabi.carrier_tau_max_us");
  if (c.carrier_tau_points < 2)
    throw ConfigError("rabi.carrier_tau_points must be >= 2");
  require_positive(c.sideband_tau_max_us, "rabi.sideband_tau_max_us");
  if (c.sideband_tau_points < 2)
    throw ConfigError("rabi.sideband_tau_points must be >= 2");
  if (c.rabi_shots < 1) throw ConfigError("rabi.shots must be >= 1");
  if (!(c.grid_to_mhz > c.grid_from_mhz))
    throw ConfigError("spectroscopy.grid_mhz.to must exceed .from");
  if (c.grid_points < 2)
    throw ConfigError("spectroscopy.grid_mhz.points must be >= 2");
  if (c.spec_shots < 1) throw ConfigError("spectroscopy.shots must be >= 1");
  require_in(c.spec_amplitude, 1e-3, 1.0, "spectroscopy.amplitude");
  require_in(c.spec_baseline, 0.0, 0.5, "spectroscopy.baseline");
  if (c.nbar_x < 0.0 || c.nbar_y < 0.0)
    throw ConfigError("preparation nbar values must be >= 0");
  require_positive(c.kick_kappa_per_vs, "preparation.kick.kappa_per_vs");
  require_positive(c.kick_cycles, "preparation.kick.cycles");
  require_positive(c.kick_drive_mhz, "preparation.kick.drive_freq_mhz");
  if (c.kick_drift_rel < 0.0 || c.kick_drift_rel > 0.5)
    throw ConfigError("preparation.kick.freq_drift_rel must lie in [0, 0.5]");
  if (c.kick_volts.empty())
    throw ConfigError("preparation.kick_volts must be non-empty");
  for (double v : c.kick_volts)
    require_positive(v, "preparation.kick_volts entry");
  if (c.mc_replicas < 0) throw ConfigError("mc.replicas must be >= 0");
  if (c.mc_fit_starts < 1) throw ConfigError("mc.fit_starts must be >= 1");
  require_in(c.priors.eta_rel_sd, 0.0, 1.0, "mc.priors.eta_rel_sd");
  require_in(c.priors.alpha_rel_sd, 0.0, 1.0, "mc.priors.alpha_rel_sd");
  require_in(c.priors.nbar_rel_sd, 0.0, 1.0, "mc.priors.nbar_rel_sd");
  require_positive(c.priors.pol_lo, "mc.priors.pol_lo");
  if (!(c.priors.pol_hi > c.priors.pol_lo))
    throw ConfigError("mc.priors.pol_hi must exceed pol_lo");
  if (c.fit_starts < 1) throw ConfigError("fitting.starts must be >= 1");
  require_in(c.tail_mass, 1e-12, 1e-2, "fitting.tail_mass");
  c.trap();  // must calibrate; throws InconsistentFrequencies otherwise
}

}  // namespace

ExperimentConfig config_from_json(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"trap", "state", "laser", "rabi", "spectroscopy", "preparation",
              "mc", "fitting"});

  ExperimentConfig c;
  if (j.contains("trap")) {
    const auto& t = j.at("trap");
    check_keys(t, "trap", {"frequencies_mhz", "rf_drive_mhz", "mass_u"});
    if (t.contains("frequencies_mhz")) {
      const auto& f = t.at("frequencies_mhz");
      check_keys(f, "trap.frequencies_mhz", {"x", "y", "z"});
      c.freq_x_mhz = get_number(f, "trap.frequencies_mhz", "x", c.freq_x_mhz);
      c.freq_y_mhz = get_number(f, "trap.frequencies_mhz", "y", c.freq_y_mhz);
      c.freq_z_mhz = get_number(f, "trap.frequencies_mhz", "z", c.freq_z_mhz);
    }
    c.rf_drive_mhz = get_number(t, "trap", "rf_drive_mhz", c.rf_drive_mhz);
    c.mass_u = get_number(t, "trap", "mass_u", c.mass_u);
  }
  if (j.contains("state")) {
    const auto& s = j.at("state");
    check_keys(s, "state", {"label", "principal_n", "pol_theory_e30"});
    if (s.contains("label")) {
      if (!s.at("label").is_string())
        throw ConfigError("state.label: expected a string");
      c.state_label = s.at("label").get<std::string>();
    }
    c.principal_n =
        static_cast<int>(get_integer(s, "state", "principal_n", c.principal_n));
    c.pol_theory_e30 = get_number(s, "state", "pol_theory_e30", c.pol_theory_e30);
  }
  if (j.contains("laser")) {
    const auto& l = j.at("laser");
    check_keys(l, "laser", {"gauss_sigma_mhz", "lorentz_fwhm_mhz"});
    c.gauss_sigma_mhz = get_number(l, "laser", "gauss_sigma_mhz", c.gauss_sigma_mhz);
    c.lorentz_fwhm_mhz =
        get_number(l, "laser", "lorentz_fwhm_mhz", c.lorentz_fwhm_mhz);
  }
  if (j.contains("rabi")) {
    const auto& r = j.at("rabi");
    check_keys(r, "rabi",
               {"omega0_mhz", "eta", "gamma_per_us", "amplitude",
                "carrier_tau_max_us", "carrier_tau_points",
                "sideband_tau_max_us", "sideband_tau_points", "shots"});
    c.rabi_omega0_mhz = get_number(r, "rabi", "omega0_mhz", c.rabi_omega0_mhz);
    c.eta = get_number(r, "rabi", "eta", c.eta);
    c.gamma_per_us = get_number(r, "rabi", "gamma_per_us", c.gamma_per_us);
    c.rabi_amplitude = get_number(r, "rabi", "amplitude", c.rabi_amplitude);
    c.carrier_tau_max_us =
        get_number(r, "rabi", "carrier_tau_max_us", c.carrier_tau_max_us);
    c.carrier_tau_points = static_cast<int>(
        get_integer(r, "rabi", "carrier_tau_points", c.carrier_tau_points));
    c.sideband_tau_max_us =
        get_number(r, "rabi", "sideband_tau_max_us", c.sideband_tau_max_us);
    c.sideband_tau_points = static_cast<int>(
        get_integer(r, "rabi", "sideband_tau_points", c.sideband_tau_points));
    c.rabi_shots = get_integer(r, "rabi", "shots", c.rabi_shots);
  }
  if (j.contains("spectroscopy")) {
    const auto& s = j.at("spectroscopy");
    check_keys(s, "spectroscopy",
               {"grid_mhz", "shots", "amplitude", "baseline"});
    if (s.contains("grid_mhz")) {
      const auto& g = s.at("grid_mhz");
      check_keys(g, "spectroscopy.grid_mhz", {"from", "to", "points"});
      c.grid_from_mhz = get_number(g, "spectroscopy.grid_mhz", "from", c.grid_from_mhz);
      c.grid_to_mhz = get_number(g, "spectroscopy.grid_mhz", "to", c.grid_to_mhz);
      c.grid_points = static_cast<int>(
          get_integer(g, "spectroscopy.grid_mhz", "points", c.grid_points));
    }
    c.spec_shots = get_integer(s, "spectroscopy", "shots", c.spec_shots);
    c.spec_amplitude = get_number(s, "spectroscopy", "amplitude", c.spec_amplitude);
    c.spec_baseline = get_number(s, "spectroscopy", "baseline", c.spec_baseline);
  }
  if (j.contains("preparation")) {
    const auto& p = j.at("preparation");
    check_keys(p, "preparation", {"nbar_x", "nbar_y", "kick", "kick_volts"});
    c.nbar_x = get_number(p, "preparation", "nbar_x", c.nbar_x);
    c.nbar_y = get_number(p, "preparation", "nbar_y", c.nbar_y);
    if (p.contains("kick")) {
      const auto& k = p.at("kick");
      check_keys(k, "preparation.kick",
                 {"kappa_per_vs", "cycles", "drive_freq_mhz", "freq_drift_rel"});
      c.kick_kappa_per_vs =
          get_number(k, "preparation.kick", "kappa_per_vs", c.kick_kappa_per_vs);
      c.kick_cycles = get_number(k, "preparation.kick", "cycles", c.kick_cycles);
      c.kick_drive_mhz =
          get_number(k, "preparation.kick", "drive_freq_mhz", c.kick_drive_mhz);
      c.kick_drift_rel =
          get_number(k, "preparation.kick", "freq_drift_rel", c.kick_drift_rel);
    }
    if (p.contains("kick_volts")) {
      if (!p.at("kick_volts").is_array())
        throw ConfigError("preparation.kick_volts: expected an array");
      c.kick_volts.clear();
      for (const auto& v : p.at("kick_volts")) {
        if (!v.is_number())
          throw ConfigError("preparation.kick_volts: expected numbers");
        c.kick_volts.push_back(v.get<double>());
      }
    }
  }
  if (j.contains("mc")) {
    const auto& m = j.at("mc");
    check_keys(m, "mc", {"replicas", "fit_starts", "priors"});
    c.mc_replicas =
        static_cast<int>(get_integer(m, "mc", "replicas", c.mc_replicas));
    c.mc_fit_starts =
        static_cast<int>(get_integer(m, "mc", "fit_starts", c.mc_fit_starts));
    if (m.contains("priors")) {
      const auto& pr = m.at("priors");
      check_keys(pr, "mc.priors",
                 {"eta_rel_sd", "alpha_rel_sd", "nbar_rel_sd", "pol_lo", "pol_hi"});
      c.priors.eta_rel_sd =
          get_number(pr, "mc.priors", "eta_rel_sd", c.priors.eta_rel_sd);
      c.priors.alpha_rel_sd =
          get_number(pr, "mc.priors", "alpha_rel_sd", c.priors.alpha_rel_sd);
      c.priors.nbar_rel_sd =
          get_number(pr, "mc.priors", "nbar_rel_sd", c.priors.nbar_rel_sd);
      c.priors.pol_lo = get_number(pr, "mc.priors", "pol_lo", c.priors.pol_lo);
      c.priors.pol_hi = get_number(pr, "mc.priors", "pol_hi", c.priors.pol_hi);
    }
  }
  if (j.contains("fitting")) {
    const auto& f = j.at("fitting");
    check_keys(f, "fitting", {"starts", "tail_mass"});
    c.fit_starts =
        static_cast<int>(get_integer(f, "fitting", "starts", c.fit_starts));
    c.tail_mass = get_number(f, "fitting", "tail_mass", c.tail_mass);
  }

  validate(c);
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["trap"] = {
      {"frequencies_mhz",
       {{"x", c.freq_x_mhz}, {"y", c.freq_y_mhz}, {"z", c.freq_z_mhz}}},
      {"rf_drive_mhz", c.rf_drive_mhz},
      {"mass_u", c.mass_u}};
  j["state"] = {{"label", c.state_label},
                {"principal_n", c.principal_n},
                {"pol_theory_e30", c.pol_theory_e30}};
  j["laser"] = {{"gauss_sigma_mhz", c.gauss_sigma_mhz},
                {"lorentz_fwhm_mhz", c.lorentz_fwhm_mhz}};
  j["rabi"] = {{"omega0_mhz", c.rabi_omega0_mhz},
               {"eta", c.eta},
               {"gamma_per_us", c.gamma_per_us},
               {"amplitude", c.rabi_amplitude},
               {"carrier_tau_max_us", c.carrier_tau_max_us},
               {"carrier_tau_points", c.carrier_tau_points},
               {"sideband_tau_max_us", c.sideband_tau_max_us},
               {"sideband_tau_points", c.sideband_tau_points},
               {"shots", c.rabi_shots}};
  j["spectroscopy"] = {{"grid_mhz",
                        {{"from", c.grid_from_mhz},
                         {"to", c.grid_to_mhz},
                         {"points", c.grid_points}}},
                       {"shots", c.spec_shots},
                       {"amplitude", c.spec_amplitude},
                       {"baseline", c.spec_baseline}};
  j["preparation"] = {{"nbar_x", c.nbar_x},
                      {"nbar_y", c.nbar_y},
                      {"kick",
                       {{"kappa_per_vs", c.kick_kappa_per_vs},
                        {"cycles", c.kick_cycles},
                        {"drive_freq_mhz", c.kick_drive_mhz},
                        {"freq_drift_rel", c.kick_drift_rel}}},
                      {"kick_volts", c.kick_volts}};
  j["mc"] = {{"replicas", c.mc_replicas},
             {"fit_starts", c.mc_fit_starts},
             {"priors",
              {{"eta_rel_sd", c.priors.eta_rel_sd},
               {"alpha_rel_sd", c.priors.alpha_rel_sd},
               {"nbar_rel_sd", c.priors.nbar_rel_sd},
               {"pol_lo", c.priors.pol_lo},
               {"pol_hi", c.priors.pol_hi}}}};
  j["fitting"] = {{"starts", c.fit_starts}, {"tail_mass", c.tail_mass}};
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_text_file(path));
}

TrapParameters ExperimentConfig::trap() const {
  return calibrate_gradients(freq_x_mhz * mhz, freq_y_mhz * mhz,
                             freq_z_mhz * mhz, rf_drive_mhz * mhz,
                             mass_u * atomic_mass_unit);
}

VoigtParams ExperimentConfig::widths() const {
  return {gauss_sigma_mhz * mhz, lorentz_fwhm_mhz * mhz};
}

namespace {

std::vector<double> tau_grid(double max_us, int points) {
  std::vector<double> taus(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    taus[static_cast<std::size_t>(i)] = max_us * us * (i + 1) / points;
  return taus;
}

}  // namespace

std::vector<double> ExperimentConfig::carrier_taus() const {
  return tau_grid(carrier_tau_max_us, carrier_tau_points);
}

std::vector<double> ExperimentConfig::sideband_taus() const {
  return tau_grid(sideband_tau_max_us, sideband_tau_points);
}

std::vector<double> ExperimentConfig::spec_grid() const {
  std::vector<double> grid(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i)
    grid[static_cast<std::size_t>(i)] =
        (grid_from_mhz +
         (grid_to_mhz - grid_from_mhz) * i / (grid_points - 1)) *
        mhz;
  return grid;
}

RabiModel ExperimentConfig::carrier() const {
  RabiModel m;
  m.omega0 = rabi_omega0_mhz * mhz;
  m.eta = eta;
  m.gamma_dec = gamma_per_us / us;
  m.amplitude = rabi_amplitude;
  m.sideband = 0;
  return m;
}

KickModel ExperimentConfig::kick(double volts) const {
  KickModel k;
  k.kappa = kick_kappa_per_vs;
  k.v_amp = volts;
  k.cycles = kick_cycles;
  k.drive_freq = kick_drive_mhz * mhz;
  k.mode_freq = k.drive_freq;  // resonant by construction; drift shifts drive
  return k;
}

}  // namespace rydion
