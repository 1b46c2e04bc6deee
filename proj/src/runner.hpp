#pragma once

#include <string>
#include <vector>

namespace ssde {

struct RunResult {
    int exit_code = 0; // 0 complete/PASS, 2 FAIL-report (1 is reserved for errors)
    std::string summary_json;
    std::vector<std::string> files_written;
};

// Executes one CLI subcommand from a JSON config. Known subcommands:
// sample-stable, simulate, converge, stability, stability-bo,
// verify-generator, cauchy, tail-check. Throws ConfigError on invalid
// configs (field-level message); other ssde errors propagate.
RunResult run_subcommand(const std::string& subcommand, const std::string& config_json,
                         const std::string& out_dir);

// FNV-1a hash of the canonical config dump, embedded into every output file.
std::string config_hash(const std::string& canonical_json);

} // namespace ssde
