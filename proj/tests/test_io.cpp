#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "rydion/constants.hpp"
#include "rydion/errors.hpp"
#include "rydion/fit.hpp"
#include "rydion/io.hpp"
#include "rydion/trap.hpp"

using namespace rydion;

TEST_CASE("fnv1a64 reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("hello") == 0xa430d84680aabd0bULL);
  CHECK(fnv1a64("tau_us,probability,shots\n") == 0x2fb716d56cba234eULL);
}

TEST_CASE("rabi CSV round trip preserves every value") {
  RabiDataset d;
  d.shots = 100;
  for (int i = 1; i <= 17; ++i) {
    d.tau.push_back(i * 0.83333333333333333 * us);
    d.prob.push_back((i % 7) / 100.0);
  }
  const std::string csv = rabi_to_csv(d);
  const RabiDataset back = rabi_from_csv(csv);
  CHECK(back.shots == d.shots);
  REQUIRE(back.tau.size() == d.tau.size());
  for (std::size_t i = 0; i < d.tau.size(); ++i) {
    // %.17g survives the double -> text -> double trip bit-exactly
    CHECK(back.tau[i] == doctest::Approx(d.tau[i]).epsilon(1e-15));
    CHECK(back.prob[i] == d.prob[i]);
  }
  CHECK(rabi_to_csv(back) == csv);
}

TEST_CASE("spectrum CSV round trip and optional shots column") {
  SpectrumDataset d;
  d.shots = 250;
  for (int i = 0; i < 12; ++i) {
    d.detuning.push_back((-14.0 + 0.19 * i) * mhz);
    d.prob.push_back(0.02 + 0.01 * i);
  }
  const std::string csv = spectrum_to_csv(d);
  const SpectrumDataset back = spectrum_from_csv(csv);
  CHECK(back.shots == 250);
  CHECK(spectrum_to_csv(back) == csv);

  const auto no_shots = spectrum_from_csv("detuning_MHz,probability\n-1.0,0.25\n");
  CHECK(no_shots.prob == std::vector<double>{0.25});
  CHECK(no_shots.shots == 0);
}

TEST_CASE("malformed CSV is rejected with a config error") {
  CHECK_THROWS_AS(rabi_from_csv("wrong,header,here\n1,2,3\n"), ConfigError);
  CHECK_THROWS_AS(rabi_from_csv("tau_us,probability,shots\n1.0,0.5\n"), ConfigError);
  CHECK_THROWS_AS(rabi_from_csv("tau_us,probability,shots\nxyz,0.5,100\n"), ConfigError);
  CHECK_THROWS_AS(spectrum_from_csv("detuning_MHz,probability\n1.0,0.5extra\n"), ConfigError);
}

TEST_CASE("fit result JSON round trip") {
  FitResult r;
  r.converged = true;
  r.iterations = 12;
  r.residual_norm = 156.75;
  r.grad_norm = 3e-9;
  r.parameters = {{"nbar", 0.4012, 0.019, "phonons"}, {"omega0", 0.09974, 0.00014, "MHz"}};
  const FitResult back = fit_result_from_json(fit_result_to_json(r));
  CHECK(back.converged == r.converged);
  CHECK(back.iterations == r.iterations);
  CHECK(back.residual_norm == r.residual_norm);
  CHECK(back.grad_norm == r.grad_norm);
  REQUIRE(back.parameters.size() == 2);
  CHECK(back.value("nbar") == r.parameters[0].value);
  CHECK(back.sigma("omega0") == r.parameters[1].sigma);
  CHECK(back.parameters[1].unit == "MHz");

  CHECK_THROWS_AS(fit_result_from_json("not json"), ConfigError);
  CHECK_THROWS_AS(fit_result_from_json("{\"converged\": true}"), ConfigError);
}

TEST_CASE("manifest is sorted, hashed and byte-stable") {
  Manifest a;
  a.record("zeta.csv", "one,two\n");
  a.record("alpha.json", "{}\n");
  a.record("mid.txt", "hello");
  Manifest b;
  b.record("mid.txt", "hello");
  b.record("alpha.json", "{}\n");
  b.record("zeta.csv", "one,two\n");
  // same content in any insertion order serializes identically
  CHECK(a.to_json() == b.to_json());

  const std::string j = a.to_json("{\"pol_e30\": 3.68}");
  CHECK(j.find("\"alpha.json\"") < j.find("\"mid.txt\""));
  CHECK(j.find("\"mid.txt\"") < j.find("\"zeta.csv\""));
  CHECK(j.find("a430d84680aabd0b") != std::string::npos);  // fnv1a64("hello")
  CHECK(j.find("\"pol_e30\": 3.68") != std::string::npos);

  // unparsable summaries degrade to an empty object instead of corrupting
  CHECK(a.to_json("nonsense").find("\"summary\": {}") != std::string::npos);
}

TEST_CASE("file IO errors carry the path") {
  CHECK_THROWS_WITH_AS(read_text_file("/nonexistent/rydion-io-test"),
                       doctest::Contains("/nonexistent/rydion-io-test"), ConfigError);
  const auto tmp = std::filesystem::temp_directory_path() / "rydion_io_test.txt";
  write_text_file(tmp, "payload");
  CHECK(read_text_file(tmp) == "payload");
  std::filesystem::remove(tmp);
}

TEST_CASE("trap calibration document round-trips and checks itself") {
  const TrapParameters trap =
      calibrate_gradients(2.16 * mhz, 1.8 * mhz, 1.05 * mhz, 14.11 * mhz, ca40_ion_mass_kg);
  const std::string doc = trap_to_json(trap);

  // schema field names are a stable contract
  for (const char* key : {"gamma_rf_v_per_m2", "gamma_dc_v_per_m2", "epsilon",
                          "rf_drive_mhz", "mass_u", "frequencies_mhz"})
    CHECK_MESSAGE(doc.find(key) != std::string::npos, key);

  const TrapParameters back = trap_from_json(doc);
  CHECK(back.gamma_rf == trap.gamma_rf);
  CHECK(back.gamma_dc == trap.gamma_dc);
  CHECK(back.epsilon == trap.epsilon);
  CHECK(back.omega_rf == doctest::Approx(trap.omega_rf).epsilon(1e-15));
  CHECK(back.mass == doctest::Approx(trap.mass).epsilon(1e-15));
  CHECK(trap_to_json(back) == doc);

  // stored frequencies must agree with the gradients they ship with
  nlohmann::json tampered = nlohmann::json::parse(doc);
  tampered["frequencies_mhz"]["x"] = 2.4;
  CHECK_THROWS_WITH_AS(trap_from_json(tampered.dump()), doctest::Contains("disagree"),
                       ConfigError);

  nlohmann::json truncated = nlohmann::json::parse(doc);
  truncated.erase("gamma_dc_v_per_m2");
  CHECK_THROWS_AS(trap_from_json(truncated.dump()), ConfigError);

  nlohmann::json negated = nlohmann::json::parse(doc);
  negated["mass_u"] = -1.0;
  CHECK_THROWS_AS(trap_from_json(negated.dump()), ConfigError);

  CHECK_THROWS_AS(trap_from_json("not json"), ConfigError);
  CHECK_THROWS_AS(trap_from_json("{}"), ConfigError);
}
