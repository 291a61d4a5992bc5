// Batch front door: composes the experiment modules into the persisted
// JSON/CSV reports behind the command-line subcommands.
#pragma once

#include <cstdint>
#include <string>

#include "fraclab/config.hpp"
#include "fraclab/measures.hpp"
#include "fraclab/spectral.hpp"

namespace fraclab::runner {

inline constexpr const char* kVersion = "0.1.0";

// exit codes: 0 success, 1 tolerance failure, 2 infeasible parameters,
// 64 usage error
struct RunResult {
  int exit_code = 0;
  std::string message;
};

RunResult run_command(const config::RunConfig& cfg, const std::string& command,
                      const std::string& out_dir);

RunResult cmd_identities(const config::RunConfig& cfg, const std::string& out_dir);
RunResult cmd_bourgain(const config::RunConfig& cfg, const std::string& out_dir);
RunResult cmd_decay(const config::RunConfig& cfg, const std::string& out_dir);
RunResult cmd_project(const config::RunConfig& cfg, const std::string& out_dir);
RunResult cmd_pipeline(const config::RunConfig& cfg, const std::string& out_dir);

// deterministic inputs shared by commands and tests
measures::BoxMeasure builtin_measure(const std::string& name, int dim);
spectral::FrequencyAtomFunction random_band_limited(int n, int atom_count, double band,
                                                    std::uint64_t seed);
spectral::ConeAtomFunction random_cone_atoms(int n, int atom_count, double r_min,
                                             std::uint64_t seed);

}  // namespace fraclab::runner
