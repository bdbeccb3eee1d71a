#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracheat/harness.hpp"
#include "fracheat/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace fracheat;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

const char* kSolveConfig = R"(
[params]
n = 1
theta = 1
p = 2

[grid]
half_width = 16
points = 64

[mesh]
horizon = 1.5
steps = 1024

[datum]
family = constant
value = 1

[experiment]
kind = solve
mode = march
)";

std::string strip_wall_time(const std::string& manifest) {
    return std::regex_replace(manifest, std::regex("wall_seconds = [^\n]*\n"), "");
}

} // namespace

TEST_CASE("config parsing") {
    const io::ConfigFile cfg = io::ConfigFile::parse_string(
        "[params]\ntheta = 1.5  # comment\nn = 2\n\n[experiment]\nkind = solve\nlist = 1 2 3\n");
    CHECK(cfg.number("params", "theta") == 1.5);
    CHECK(cfg.integer("params", "n") == 2);
    CHECK(cfg.numbers("experiment", "list") == std::vector<double>{1, 2, 3});
    CHECK(cfg.get_or("params", "missing", "x") == "x");
    CHECK_THROWS_AS(cfg.get("params", "missing"), io::ConfigError);
    CHECK_THROWS_AS(io::ConfigFile::parse_string("[params\n"), io::ConfigError);
    CHECK_THROWS_AS(io::ConfigFile::parse_string("novalue\n"), io::ConfigError);
}

TEST_CASE("malformed model parameters are named in the error") {
    TempDir dir("fracheat_badcfg");
    const std::string cfg_path = (dir.path / "bad.cfg").string();
    io::write_text(cfg_path, "[params]\nn = 1\ntheta = 1\np = 0.5\n"
                             "[experiment]\nkind = solve\n[datum]\nfamily = constant\nvalue = 1\n");
    const RunConfig rc = RunConfig::load(cfg_path, "solve", (dir.path / "out").string());
    try {
        run_experiment(rc);
        FAIL("expected a validation error");
    } catch (const io::ConfigError& e) {
        CHECK(std::string(e.what()).find("p > 1") != std::string::npos);
    }
}

TEST_CASE("solve experiment produces a manifest with the ODE horizon") {
    TempDir dir("fracheat_solve");
    const std::string cfg_path = (dir.path / "solve.cfg").string();
    io::write_text(cfg_path, kSolveConfig);
    const RunConfig rc = RunConfig::load(cfg_path, "solve", (dir.path / "out").string());
    const std::string manifest_path = run_experiment(rc);
    const std::string manifest = io::read_text(manifest_path);
    CHECK(manifest.find("status = blow_up") != std::string::npos);

    std::smatch m;
    REQUIRE(std::regex_search(manifest, m, std::regex("t_est = ([0-9.eE+-]+)")));
    CHECK(std::stod(m[1]) == doctest::Approx(1.0).epsilon(0.02));

    // every output file is listed with its checksum
    for (const auto& entry : fs::directory_iterator(dir.path / "out")) {
        const std::string name = entry.path().filename().string();
        if (name == "manifest.txt") continue;
        CHECK(manifest.find(name + " fnv1a=") != std::string::npos);
    }
}

TEST_CASE("identical configs reproduce identical outputs") {
    TempDir dir("fracheat_determinism");
    const std::string cfg_path = (dir.path / "solve.cfg").string();
    io::write_text(cfg_path, kSolveConfig);
    const std::string m1 =
        run_experiment(RunConfig::load(cfg_path, "solve", (dir.path / "a").string()));
    const std::string m2 =
        run_experiment(RunConfig::load(cfg_path, "solve", (dir.path / "b").string()));
    CHECK(io::read_text((dir.path / "a" / "norm_history.csv").string()) ==
          io::read_text((dir.path / "b" / "norm_history.csv").string()));
    CHECK(strip_wall_time(io::read_text(m1)) == strip_wall_time(io::read_text(m2)));
}

TEST_CASE("report merges manifests of one experiment type") {
    TempDir dir("fracheat_report");
    const std::string cfg_path = (dir.path / "solve.cfg").string();
    io::write_text(cfg_path, kSolveConfig);
    const std::string m1 =
        run_experiment(RunConfig::load(cfg_path, "solve", (dir.path / "a").string()));
    const std::string m2 =
        run_experiment(RunConfig::load(cfg_path, "solve", (dir.path / "b").string()));

    std::ostringstream table;
    run_report({m1, m2}, table, (dir.path / "merged").string());
    CHECK(table.str().find("experiment: solve") != std::string::npos);
    CHECK(table.str().find("t_est") != std::string::npos);
    CHECK(fs::exists(dir.path / "merged" / "report.csv"));

    std::ostringstream empty;
    run_report({}, empty, "");
    CHECK(empty.str() == "(no manifests)\n");

    // mixed experiment types are rejected
    io::write_text((dir.path / "other.txt").string(),
                   "format = fracheat-manifest-1\nexperiment = sweep\n[results]\n");
    std::ostringstream sink;
    CHECK_THROWS_AS(run_report({m1, (dir.path / "other.txt").string()}, sink, ""),
                    std::runtime_error);
}

TEST_CASE("kernel-check experiment reports the certification measurements") {
    TempDir dir("fracheat_kernelcheck");
    const std::string cfg_path = (dir.path / "k.cfg").string();
    io::write_text(cfg_path, R"(
[params]
n = 1
theta = 1
[grid]
half_width = 32
points = 1024
[kernel]
samples = 512
[experiment]
kind = kernel-check
)");
    const std::string manifest =
        io::read_text(run_experiment(RunConfig::load(cfg_path, "kernel-check",
                                                     (dir.path / "out").string())));
    CHECK(manifest.find("mass_defect = ") != std::string::npos);
    CHECK(manifest.find("triple_agreement_max_rel = ") != std::string::npos);
    CHECK(manifest.find("subordinator_mass = ") != std::string::npos);
    CHECK(manifest.find("identity_max_abs_deviation = ") != std::string::npos);
    CHECK(fs::exists(dir.path / "out" / "profile.txt"));
    CHECK(fs::exists(dir.path / "out" / "profile.csv"));
}

TEST_CASE("criteria experiment writes the scan and verdicts") {
    TempDir dir("fracheat_criteria");
    const std::string cfg_path = (dir.path / "c.cfg").string();
    io::write_text(cfg_path, R"(
[params]
n = 1
theta = 1
p = 1.5
[grid]
half_width = 16
points = 1024
[datum]
family = power_law
decay = 2
amplitude = 0.1
[experiment]
kind = criteria
horizon = 1
sufficient_variant = ball_mass
)");
    const std::string manifest = io::read_text(
        run_experiment(RunConfig::load(cfg_path, "criteria", (dir.path / "out").string())));
    CHECK(manifest.find("necessary_id = necessary_1") != std::string::npos);
    CHECK(manifest.find("sufficient_id = sufficient_1_9") != std::string::npos);
    CHECK(fs::exists(dir.path / "out" / "ballscan.csv"));
}

TEST_CASE("sweep experiment feeds the fit experiment") {
    TempDir dir("fracheat_sweepfit");
    const std::string sweep_cfg = (dir.path / "s.cfg").string();
    io::write_text(sweep_cfg, R"(
[params]
n = 1
theta = 1
p = 1.5
[grid]
points = 512
[mesh]
steps = 512
[experiment]
kind = sweep
decay = 2
lambda_lo = 0.005
lambda_hi = 0.05
lambda_count = 5
)");
    RunConfig rc = RunConfig::load(sweep_cfg, "sweep", (dir.path / "sweep_out").string(), 2);
    const std::string manifest = io::read_text(run_experiment(rc));
    CHECK(manifest.find("fitted_slope = ") != std::string::npos);
    CHECK(fs::exists(dir.path / "sweep_out" / "sweep.csv"));
    CHECK(fs::exists(dir.path / "sweep_out" / "plot_fit.dat"));

    const std::string fit_cfg = (dir.path / "f.cfg").string();
    io::write_text(fit_cfg, "[params]\nn = 1\ntheta = 1\np = 1.5\n[experiment]\nkind = fit\n"
                            "decay = 2\nrecords = " +
                                (dir.path / "sweep_out" / "sweep.csv").string() + "\n");
    const std::string fit_manifest = io::read_text(
        run_experiment(RunConfig::load(fit_cfg, "fit", (dir.path / "fit_out").string())));
    std::smatch m;
    REQUIRE(std::regex_search(fit_manifest, m, std::regex("fitted_slope = ([0-9.eE+-]+)")));
    CHECK(std::stod(m[1]) == doctest::Approx(-1.0).epsilon(0.25));
    CHECK(fit_manifest.find("theory_slope = -1") != std::string::npos);
}

TEST_CASE("dichotomy experiment records stable brackets") {
    TempDir dir("fracheat_dich");
    const std::string cfg_path = (dir.path / "d.cfg").string();
    io::write_text(cfg_path, R"(
[params]
n = 1
theta = 1
p = 3
[mesh]
steps = 256
grading = 2
[experiment]
kind = dichotomy
profile = singular
gamma_lo = 0.1
gamma_hi = 1.5
horizon = 1
rel_width = 0.25
grids = 512 1024
)");
    const std::string manifest = io::read_text(
        run_experiment(RunConfig::load(cfg_path, "dichotomy", (dir.path / "out").string())));
    CHECK(manifest.find("overlapping = ") != std::string::npos);
    CHECK(manifest.find("gamma_lo = ") != std::string::npos);
    CHECK(fs::exists(dir.path / "out" / "dichotomy.csv"));
}

TEST_CASE("failed runs remove their partial outputs") {
    TempDir dir("fracheat_cleanup");
    const std::string cfg_path = (dir.path / "bad.cfg").string();
    // validation passes but the records file is missing -> numeric failure
    io::write_text(cfg_path, "[params]\nn = 1\ntheta = 1\np = 2\n[experiment]\nkind = fit\n"
                             "decay = 0.3\nrecords = " +
                                 (dir.path / "absent.csv").string() + "\n");
    const RunConfig rc = RunConfig::load(cfg_path, "fit", (dir.path / "out").string());
    CHECK_THROWS(run_experiment(rc));
    CHECK(!fs::exists(dir.path / "out" / "manifest.txt"));
    CHECK(!fs::exists(dir.path / "out" / "fit_report.txt"));
}

TEST_CASE("experiment kind must match the subcommand") {
    TempDir dir("fracheat_kind");
    const std::string cfg_path = (dir.path / "solve.cfg").string();
    io::write_text(cfg_path, kSolveConfig);
    CHECK_THROWS_AS(RunConfig::load(cfg_path, "sweep"), io::ConfigError);
}

TEST_CASE("field text round trip") {
    Grid g;
    g.dim = 1;
    g.points = 16;
    g.half_width = 2.0;
    Field f = make_field(g, 0.25);
    for (int i = 0; i < 16; ++i) f.values[i] = std::sin(0.37 * i) + 2.0;
    TempDir dir("fracheat_field");
    const std::string path = (dir.path / "f.txt").string();
    io::write_field(f, path);
    const Field back = io::read_field(path);
    CHECK(back.time == f.time);
    CHECK((back.values - f.values).abs().maxCoeff() == 0.0);
}

#ifdef FRACHEAT_CLI_PATH
TEST_CASE("cli exit codes") {
    TempDir dir("fracheat_cli");
    const std::string cfg_path = (dir.path / "solve.cfg").string();
    io::write_text(cfg_path, kSolveConfig);
    const std::string cli = FRACHEAT_CLI_PATH;

    const auto run = [&](const std::string& args) {
        const int raw = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
        return WEXITSTATUS(raw);
    };
    CHECK(run("solve --config " + cfg_path + " --out " + (dir.path / "ok").string() +
              " --seedless") == 0);
    // config kind mismatch -> validation failure
    CHECK(run("sweep --config " + cfg_path + " --out " + (dir.path / "bad").string()) == 2);
    // missing required flag -> CLI validation failure
    CHECK(run("solve") == 2);
    // bad numeric input discovered at runtime -> numeric failure
    io::write_text((dir.path / "fit.cfg").string(),
                   "[params]\nn = 1\ntheta = 1\np = 2\n[experiment]\nkind = fit\ndecay = 0.3\n"
                   "records = " + (dir.path / "missing.csv").string() + "\n");
    CHECK(run("fit --config " + (dir.path / "fit.cfg").string() + " --out " +
              (dir.path / "fit").string()) == 3);
}
#endif
