#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rydion/config.hpp"
#include "rydion/fit.hpp"
#include "rydion/mc.hpp"

namespace rydion {

struct PipelineOptions {
  std::filesystem::path out_dir;  // empty: timestamped directory under cwd
  std::uint64_t seed = 1;
};

struct PipelineResult {
  std::filesystem::path out_dir;
  FitResult thermal;
  std::vector<double> alpha_true;     // per kick, from the kick response
  std::vector<FitResult> alpha_fits;  // per kick
  std::vector<FitResult> pair_fits;   // per kick
  std::optional<McReport> mc_pol;
  double pol_e30 = 0.0;    // inverse-variance average over kicks
  double pol_sigma = 0.0;  // its standard error
  std::string manifest_json;
};

// Full synthetic run: generate sideband data, calibrate the thermal motion,
// fit the kicked coherent sizes, generate and fit the spectrum pairs, then
// average the per-kick polarizabilities. Every output file lands in out_dir
// and is listed in manifest.json with a content hash. A stage failure throws
// with the stage name prefixed; files written so far stay on disk.
PipelineResult run_pipeline(const ExperimentConfig& config, const PipelineOptions& opts);

// The Monte-Carlo setup matching a config's nominal experiment, used by the
// mc CLI verb and the pipeline's optional uncertainty stage.
McSetup mc_setup_from_config(const ExperimentConfig& config, double alpha_nominal);

enum class FigureKind {
  lineshape_fock_decomposition,
  spectrum_pair,
  shift_vs_alpha,
  shift_vs_nbar,
  pol_vs_alpha,
};

FigureKind figure_kind_from_string(std::string_view name);

// Re-plottable CSV for one figure kind, written to out_path. Kinds that read
// pipeline outputs (pol-vs-alpha, spectrum-pair) take the run directory via
// run_dir and throw MissingInput when the needed files are absent. Sweep
// kinds accept an empty sweep and then emit just the header.
void emit_figure_data(FigureKind kind, const ExperimentConfig& config,
                      const std::filesystem::path& out_path,
                      const std::filesystem::path& run_dir = {},
                      const std::vector<double>& sweep = {});

}  // namespace rydion
