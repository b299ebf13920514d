#include "rydion/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rydion/constants.hpp"
#include "rydion/errors.hpp"
#include "rydion/trap.hpp"

namespace rydion {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view csv) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::istringstream in{std::string(csv)};
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("malformed ") + what + " value: '" + s + "'");
  }
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("short write to " + path.string());
}

std::string rabi_to_csv(const RabiDataset& data) {
  std::string out = "tau_us,probability,shots\n";
  for (std::size_t i = 0; i < data.tau.size(); ++i) {
    out += fmt(data.tau[i] / us);
    out += ',';
    out += fmt(data.prob[i]);
    out += ',';
    out += std::to_string(data.shots);
    out += '\n';
  }
  return out;
}

RabiDataset rabi_from_csv(std::string_view csv) {
  const auto rows = parse_csv(csv);
  if (rows.empty() || rows[0].size() < 3 || rows[0][0] != "tau_us")
    throw ConfigError("expected CSV header tau_us,probability,shots");
  RabiDataset data;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 3) throw ConfigError("malformed sideband CSV row");
    data.tau.push_back(parse_double(rows[i][0], "tau_us") * us);
    data.prob.push_back(parse_double(rows[i][1], "probability"));
    data.shots = static_cast<std::int64_t>(parse_double(rows[i][2], "shots"));
  }
  return data;
}

std::string spectrum_to_csv(const SpectrumDataset& data) {
  std::string out = "detuning_MHz,probability,shots\n";
  for (std::size_t i = 0; i < data.detuning.size(); ++i) {
    out += fmt(data.detuning[i] / mhz);
    out += ',';
    out += fmt(data.prob[i]);
    out += ',';
    out += std::to_string(data.shots);
    out += '\n';
  }
  return out;
}

SpectrumDataset spectrum_from_csv(std::string_view csv) {
  const auto rows = parse_csv(csv);
  if (rows.empty() || rows[0].empty() || rows[0][0] != "detuning_MHz")
    throw ConfigError("expected CSV header detuning_MHz,probability[,shots]");
  SpectrumDataset data;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() < 2) throw ConfigError("malformed spectrum CSV row");
    data.detuning.push_back(parse_double(rows[i][0], "detuning_MHz") * mhz);
    data.prob.push_back(parse_double(rows[i][1], "probability"));
    if (rows[i].size() >= 3)
      data.shots = static_cast<std::int64_t>(parse_double(rows[i][2], "shots"));
  }
  return data;
}

std::string fit_result_to_json(const FitResult& result) {
  nlohmann::ordered_json j;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["residual_norm"] = result.residual_norm;
  j["grad_norm"] = result.grad_norm;
  j["parameters"] = nlohmann::ordered_json::array();
  for (const auto& p : result.parameters)
    j["parameters"].push_back(
        {{"name", p.name}, {"value", p.value}, {"sigma", p.sigma}, {"unit", p.unit}});
  return j.dump(2) + "\n";
}

FitResult fit_result_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad fit-result JSON: ") + e.what());
  }
  FitResult r;
  try {
    r.converged = j.at("converged").get<bool>();
    r.iterations = j.at("iterations").get<int>();
    r.residual_norm = j.at("residual_norm").get<double>();
    r.grad_norm = j.value("grad_norm", 0.0);
    for (const auto& p : j.at("parameters"))
      r.parameters.push_back(FitParameter{p.at("name").get<std::string>(),
                                          p.at("value").get<double>(),
                                          p.at("sigma").get<double>(),
                                          p.value("unit", std::string{})});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad fit-result JSON: ") + e.what());
  }
  return r;
}

std::string trap_to_json(const TrapParameters& trap) {
  const ModeFrequencies f = secular_frequencies(trap, Polarizability{0.0});
  nlohmann::ordered_json j;
  j["gamma_rf_v_per_m2"] = trap.gamma_rf;
  j["gamma_dc_v_per_m2"] = trap.gamma_dc;
  j["epsilon"] = trap.epsilon;
  j["rf_drive_mhz"] = trap.omega_rf / mhz;
  j["mass_u"] = trap.mass / atomic_mass_unit;
  j["frequencies_mhz"] = {{"x", f.x / mhz}, {"y", f.y / mhz}, {"z", f.z / mhz}};
  return j.dump(2) + "\n";
}

TrapParameters trap_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad calibration JSON: ") + e.what());
  }
  TrapParameters trap;
  double fx, fy, fz;
  try {
    trap.gamma_rf = j.at("gamma_rf_v_per_m2").get<double>();
    trap.gamma_dc = j.at("gamma_dc_v_per_m2").get<double>();
    trap.epsilon = j.at("epsilon").get<double>();
    trap.omega_rf = j.at("rf_drive_mhz").get<double>() * mhz;
    trap.mass = j.at("mass_u").get<double>() * atomic_mass_unit;
    const auto& f = j.at("frequencies_mhz");
    fx = f.at("x").get<double>();
    fy = f.at("y").get<double>();
    fz = f.at("z").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad calibration JSON: ") + e.what());
  }
  if (trap.gamma_rf <= 0.0 || trap.omega_rf <= 0.0 || trap.mass <= 0.0)
    throw ConfigError("calibration JSON: gradients, drive and mass must be positive");
  ModeFrequencies f;
  try {
    f = secular_frequencies(trap, Polarizability{0.0});
  } catch (const Error& e) {
    throw ConfigError(std::string("calibration JSON does not confine: ") + e.what());
  }
  const auto consistent = [](double stored, double implied) {
    return std::abs(stored - implied) <= 1e-9 * implied;
  };
  if (!consistent(fx, f.x / mhz) || !consistent(fy, f.y / mhz) || !consistent(fz, f.z / mhz))
    throw ConfigError("calibration JSON: stored frequencies disagree with the gradients");
  return trap;
}

std::string mc_report_to_json(const McReport& report) {
  nlohmann::ordered_json j;
  switch (report.problem) {
    case McProblem::thermal_nbar:
      j["problem"] = "thermal";
      break;
    case McProblem::coherent_alpha:
      j["problem"] = "alpha";
      break;
    case McProblem::polarizability:
      j["problem"] = "pol";
      break;
  }
  j["replicas"] = report.replicas;
  j["failures"] = report.failures;
  j["nominal"] = report.nominal;
  j["mean_ratio"] = report.mean_ratio;
  j["rel_spread"] = report.rel_spread;
  j["abs_spread"] = report.abs_spread;
  j["mean_fit_sigma"] = report.mean_fit_sigma;
  j["estimates"] = report.estimates;
  j["truths"] = report.truths;
  return j.dump(2) + "\n";
}

void Manifest::record(std::string name, std::string_view content) {
  entries_.push_back(Entry{std::move(name), content.size(), fnv1a64(content)});
}

std::string Manifest::to_json(std::string_view summary_json) const {
  auto sorted = entries_;
  std::sort(sorted.begin(), sorted.end(),
            [](const Entry& a, const Entry& b) { return a.name < b.name; });
  nlohmann::ordered_json j;
  j["files"] = nlohmann::ordered_json::array();
  for (const auto& e : sorted) {
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(e.hash));
    j["files"].push_back({{"name", e.name}, {"bytes", e.bytes}, {"fnv1a64", hex}});
  }
  try {
    j["summary"] = nlohmann::ordered_json::parse(summary_json);
  } catch (const nlohmann::json::exception&) {
    j["summary"] = nlohmann::ordered_json::object();
  }
  return j.dump(2) + "\n";
}

}  // namespace rydion
