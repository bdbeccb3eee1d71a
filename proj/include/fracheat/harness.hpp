#pragma once

#include "fracheat/io.hpp"
#include "fracheat/model.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fracheat {

inline constexpr const char* kVersion = "0.1.0";

// Parsed and validated experiment description. Two runs with an identical
// RunConfig produce identical numeric outputs (CSV bytes included).
struct RunConfig {
    io::ConfigFile raw;
    std::string experiment; // kernel-check | solve | criteria | sweep | dichotomy | fit
    std::string out_dir;
    int jobs = 1;

    static RunConfig load(const std::string& config_path, const std::string& experiment,
                          const std::string& out_override = {}, int jobs = 1);

    ModelParams params() const;
};

// Runs the configured experiment, writes its outputs plus a manifest listing
// every file with a checksum; partial outputs are removed on failure.
// Returns the manifest path.
std::string run_experiment(const RunConfig& config);

// Merges manifests of one experiment type into a human-readable table and a
// CSV (written under out_dir when non-empty).
void run_report(const std::vector<std::string>& manifest_paths, std::ostream& table,
                const std::string& out_dir);

} // namespace fracheat
