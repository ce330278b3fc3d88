#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spec_io.hpp"

namespace mca::lab {

inline constexpr const char* kToolVersion = "1.0.0";

struct RunSettings {
  std::filesystem::path out_dir = "out";
  std::optional<std::size_t> workers;    // --workers, then MCA_LAB_WORKERS, then config "workers"
  std::optional<std::uint64_t> seed;     // --seed, then config "seed"
  std::optional<std::uint64_t> cap;      // --cap-states, then config "cap_states"
};

/// Runs one subcommand on a parsed config and writes its outputs plus
/// manifest.json into the output directory. Returns the process exit code:
/// 0 when every verification passed, 1 otherwise. Spec and library errors
/// propagate as mca::Error.
int run_command(const std::string& command, const json& config, const RunSettings& settings);

const std::vector<std::string>& command_names();

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace mca::lab
