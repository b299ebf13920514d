#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rydion/fit.hpp"
#include "rydion/lineshape.hpp"
#include "rydion/mc.hpp"
#include "rydion/rabi.hpp"

namespace rydion {

// FNV-1a, 64 bit; the manifest's content hash.
std::uint64_t fnv1a64(std::string_view data);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

// CSV with header tau_us,probability,shots.
std::string rabi_to_csv(const RabiDataset& data);
RabiDataset rabi_from_csv(std::string_view csv);

// CSV with header detuning_MHz,probability,shots; a missing shots column
// reads as 0 (model curves rather than measured data).
std::string spectrum_to_csv(const SpectrumDataset& data);
SpectrumDataset spectrum_from_csv(std::string_view csv);

std::string fit_result_to_json(const FitResult& result);
FitResult fit_result_from_json(std::string_view json_text);

// Trap calibration document: gradients in V/m^2, drive in MHz, mass in u,
// plus the implied zero-polarizability secular frequencies for the reader.
// trap_from_json recomputes those frequencies from the gradients and rejects
// documents where the two disagree.
std::string trap_to_json(const TrapParameters& trap);
TrapParameters trap_from_json(std::string_view json_text);

std::string mc_report_to_json(const McReport& report);

// Deterministic run inventory: file names, sizes and content hashes, sorted
// by name. Contains no timestamps, so a fixed-seed run reproduces it byte
// for byte.
class Manifest {
 public:
  void record(std::string name, std::string_view content);
  std::string to_json(std::string_view summary_json = "{}") const;

 private:
  struct Entry {
    std::string name;
    std::size_t bytes;
    std::uint64_t hash;
  };
  std::vector<Entry> entries_;
};

}  // namespace rydion
