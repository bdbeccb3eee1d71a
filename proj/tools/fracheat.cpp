#include "fracheat/harness.hpp"
#include "fracheat/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct CommonFlags {
    std::string config;
    std::string out;
    int jobs = 1;
    bool seedless = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required = true) {
    auto* opt = cmd->add_option("--config", flags.config, "experiment config file");
    if (config_required) opt->required();
    cmd->add_option("--out", flags.out, "output directory (overrides the config)");
    cmd->add_option("--jobs", flags.jobs, "worker count for sweep points")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--seedless", flags.seedless,
                  "assert that the run uses no randomness (always holds; recorded)");
}

int dispatch(const std::string& experiment, const CommonFlags& flags) {
    fracheat::RunConfig rc =
        fracheat::RunConfig::load(flags.config, experiment, flags.out, flags.jobs);
    if (flags.seedless && rc.raw.has("experiment", "seed"))
        throw fracheat::io::ConfigError("--seedless: config declares a seed, but no experiment "
                                        "accepts one");
    const std::string manifest = fracheat::run_experiment(rc);
    std::cout << "manifest: " << manifest << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractional semilinear heat equation desk: kernels, mild solutions, "
                 "solvability criteria and life-span scaling"};
    app.require_subcommand(1);

    const std::vector<std::string> experiments = {"kernel-check", "solve", "criteria",
                                                  "sweep", "dichotomy", "fit"};
    std::map<std::string, CommonFlags> flags;
    for (const std::string& name : experiments) {
        CLI::App* cmd = app.add_subcommand(name, name + " experiment");
        add_common(cmd, flags[name]);
    }

    CommonFlags report_flags;
    std::vector<std::string> manifests;
    CLI::App* report = app.add_subcommand("report", "merge manifests into a summary table");
    report->add_option("manifests", manifests, "manifest files of one experiment type");
    report->add_option("--out", report_flags.out, "directory for the merged CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitValidation : 0;
    }

    try {
        for (const std::string& name : experiments)
            if (app.get_subcommand(name)->parsed()) return dispatch(name, flags[name]);
        if (report->parsed()) {
            fracheat::run_report(manifests, std::cout, report_flags.out);
            return 0;
        }
    } catch (const fracheat::io::ConfigError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
