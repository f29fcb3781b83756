#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cdqkd/config.hpp"

namespace cdqkd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

struct ExperimentOutcome {
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> outputs;  ///< data files, manifest last
    std::string diagnostic;                      ///< one line, empty on success
};

/// Runs the configured mode and writes its CSV files plus manifest.json
/// into config.output_dir. The thread count only affects speed.
ExperimentOutcome run_experiment(const ExperimentConfig& config, int threads = 1);

/// Manifest contents: tool version, mode, seed, data files and the full
/// resolved configuration.
nlohmann::json make_manifest(const ExperimentConfig& config,
                             const std::vector<std::filesystem::path>& outputs);

std::string library_version();

}  // namespace cdqkd
