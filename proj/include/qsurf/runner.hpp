#pragma once

#include <map>
#include <string>

#include "qsurf/config.hpp"

// Executes one configured workflow and writes its artifacts. All outputs are
// composed in memory first and written in one pass together with a manifest
// (name, content hash, size), so a failed run leaves no partial artifacts
// and identical configs produce byte-identical files.

namespace qsurf::runner {

struct RunRequest {
    config::Command command = config::Command::Simulate;
    std::string config_path;
    std::string out_dir;
    int jobs = 1;
    bool verbose = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

int run(const RunRequest& request);

// Testable core: artifacts for a validated config, keyed by file name.
std::map<std::string, std::string> produce_artifacts(const config::RunConfig& cfg, int jobs,
                                                     bool verbose);

}  // namespace qsurf::runner
