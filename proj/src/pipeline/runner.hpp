// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pipeline/config.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace fbsde {

enum class Stage { check, solve, simulate, bounds, verify };
std::string_view to_string(Stage s) noexcept;
/// Throws ArgumentError for an unknown name.
Stage stage_from_string(std::string_view s);

/// Process exit codes of the pipeline.
enum ExitCode : int {
    kExitPass = 0,
    kExitError = 1,
    kExitCheckFailed = 2,
    kExitAssumptionFailed = 3,
};

struct RunOptions {
    std::string out_dir = "out";
    unsigned threads = 0;   ///< 0 = hardware concurrency
    std::string cache_dir;  ///< empty = SolutionCache::default_dir(out_dir)
    bool use_cache = true;
    std::string command;    ///< recorded in the metadata sidecar
};

struct RunOutcome {
    int exit_code = kExitPass;
    std::string message;
    /// Text for standard output (the assumption report for check, a verdict summary otherwise).
    std::string summary;
    std::vector<std::string> artifacts;  ///< file names relative to out_dir
};

/// Runs `stage` and every earlier stage it needs, writing artifacts into
/// options.out_dir. Assumption failures and failed checks are reported through
/// the exit code; runtime failures throw.
RunOutcome run_stage(Stage stage, const RunConfig& config, const RunOptions& options);

}  // namespace fbsde
