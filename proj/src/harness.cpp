#include "fracheat/harness.hpp"

#include "fracheat/criteria.hpp"
#include "fracheat/datum.hpp"
#include "fracheat/kernel.hpp"
#include "fracheat/lifespan.hpp"
#include "fracheat/quadrature.hpp"
#include "fracheat/semigroup.hpp"
#include "fracheat/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

namespace fracheat {

namespace fs = std::filesystem;
using io::ConfigError;
using io::ConfigFile;
using io::format_number;

namespace {

ModelParams parse_params(const ConfigFile& cfg, bool need_p = true) {
    ModelParams mp;
    mp.dim = cfg.integer_or("params", "n", 1);
    mp.theta = cfg.number("params", "theta");
    mp.p = need_p ? cfg.number("params", "p") : cfg.number_or("params", "p", 2.0);
    try {
        mp.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: [params] invalid: ") + e.what());
    }
    return mp;
}

Grid parse_grid(const ConfigFile& cfg, const ModelParams& mp) {
    Grid g;
    g.dim = mp.dim;
    g.half_width = cfg.number_or("grid", "half_width", 32.0);
    g.points = cfg.integer_or("grid", "points", 1024);
    try {
        g.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: [grid] invalid: ") + e.what());
    }
    return g;
}

TimeMesh parse_mesh(const ConfigFile& cfg) {
    TimeMesh m;
    m.horizon = cfg.number_or("mesh", "horizon", 1.0);
    m.steps = cfg.integer_or("mesh", "steps", 512);
    m.grading = cfg.number_or("mesh", "grading", 1.0);
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: [mesh] invalid: ") + e.what());
    }
    return m;
}

InitialDatum parse_datum(const ConfigFile& cfg, const ModelParams& mp) {
    InitialDatum d;
    const std::string family = cfg.get_or("datum", "family", "none");
    if (family != "none") {
        ClosedForm cf;
        if (family == "constant") {
            cf.family = DatumFamily::Constant;
            cf.offset = cfg.number("datum", "value");
        } else if (family == "power_law") {
            cf.family = DatumFamily::PowerLaw;
            cf.decay = cfg.number("datum", "decay");
        } else if (family == "singular") {
            cf.family = DatumFamily::Singular;
            cf.exponent = cfg.number("datum", "exponent");
            cf.strength = cfg.number("datum", "strength");
        } else if (family == "critical_log") {
            cf.family = DatumFamily::CriticalLog;
            cf.strength = cfg.number("datum", "strength");
            cf.offset = cfg.number_or("datum", "offset", 0.0);
        } else {
            throw ConfigError("config: [datum] family '" + family + "' is not known");
        }
        d.closed_form = cf;
    }
    if (cfg.has("datum", "atoms")) {
        // "x:mass" or "x,y:mass", whitespace separated
        std::istringstream in(cfg.get("datum", "atoms"));
        std::string tok;
        while (in >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw ConfigError("config: [datum] atoms: expected location:mass, got " + tok);
            Atom a;
            const std::string loc = tok.substr(0, colon);
            const auto comma = loc.find(',');
            try {
                if (comma == std::string::npos) {
                    a.where[0] = std::stod(loc);
                } else {
                    a.where[0] = std::stod(loc.substr(0, comma));
                    a.where[1] = std::stod(loc.substr(comma + 1));
                }
                a.mass = std::stod(tok.substr(colon + 1));
            } catch (const std::exception&) {
                throw ConfigError("config: [datum] atoms: bad entry " + tok);
            }
            d.atoms.push_back(a);
        }
    }
    d.amplitude = cfg.number_or("datum", "amplitude", 1.0);
    if (!d.closed_form && d.atoms.empty())
        throw ConfigError("config: [datum] needs a family or atoms");
    try {
        d.validate(mp);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: [datum] invalid: ") + e.what());
    }
    return d;
}

MarchOptions parse_march_options(const ConfigFile& cfg) {
    MarchOptions mo;
    mo.blowup_threshold = cfg.number_or("tolerances", "blowup_threshold", 0.0);
    mo.threshold_factor = cfg.number_or("tolerances", "threshold_factor", 1e8);
    mo.bracket_rel_width = cfg.number_or("tolerances", "bracket_rel_width", 0.005);
    mo.growth_cap = cfg.number_or("tolerances", "growth_cap", 0.05);
    if (cfg.has("experiment", "snapshot_times"))
        mo.snapshot_times = cfg.numbers("experiment", "snapshot_times");
    return mo;
}

Eigen::ArrayXd sigma_grid(const ConfigFile& cfg, const ModelParams& mp, double T) {
    const double root = std::pow(T, 1.0 / mp.theta);
    const double decades = cfg.number_or("experiment", "sigma_decades", 2.0);
    const int per_decade = cfg.integer_or("experiment", "sigma_per_decade", 16);
    const int count = std::max(2, int(std::lround(decades * per_decade)));
    Eigen::ArrayXd sigma(count + 1);
    for (int i = 0; i <= count; ++i)
        sigma[i] = root * std::pow(10.0, -decades * (1.0 - double(i) / count));
    sigma[count] = root; // exact endpoint
    return sigma;
}

// collected experiment results, written to the manifest
using Results = std::vector<std::pair<std::string, std::string>>;

struct OutputTracker {
    fs::path dir;
    std::vector<std::string> names;

    void write(const std::string& name, const std::string& content) {
        io::write_text((dir / name).string(), content);
        names.push_back(name);
    }
    void discard_all() {
        for (const std::string& n : names) {
            std::error_code ec;
            fs::remove(dir / n, ec);
        }
    }
};

void experiment_kernel_check(const RunConfig& config, OutputTracker& out, Results& res) {
    const ConfigFile& cfg = config.raw;
    const ModelParams mp = parse_params(cfg, /*need_p=*/false);
    RadialGridSpec spec;
    spec.r_min = cfg.number_or("kernel", "r_min", 1e-3);
    spec.r_max = cfg.number_or("kernel", "r_max", 1e3);
    spec.samples = cfg.integer_or("kernel", "samples", 4096);

    const KernelProfile prof = build_profile(mp.theta, mp.dim, spec);
    export_profile(prof, (out.dir / "profile.txt").string());
    out.names.push_back("profile.txt");

    io::CsvWriter csv({"r", "value"});
    for (Eigen::Index i = 0; i < prof.radii.size(); ++i)
        csv.row_numbers({prof.radii[i], prof.values[i]});
    out.write("profile.csv", csv.str());

    res.emplace_back("theta", format_number(mp.theta));
    res.emplace_back("mass_defect", format_number(prof.mass_defect));
    res.emplace_back("tail_coeff", format_number(prof.tail_coeff()));
    res.emplace_back("quad_error", format_number(prof.quad_error_estimate));
    if (mp.theta < 2.0) {
        res.emplace_back("bound_sup", format_number(prof.bound_sup));
        res.emplace_back("bound_inf", format_number(prof.bound_inf));
    }

    const Grid grid = parse_grid(cfg, mp);
    const double t = cfg.number_or("experiment", "identity_t", 1.0);
    const double s = cfg.number_or("experiment", "identity_s", 0.5 * t);
    const SemigroupIdentityReport idr = check_semigroup_identity(prof, s, t, grid);
    res.emplace_back("identity_max_abs_deviation", format_number(idr.max_abs_deviation));
    res.emplace_back("identity_peak", format_number(idr.peak));

    if (mp.theta == 1.0) {
        // triple agreement: closed form vs Fourier inversion vs subordination
        double worst = 0.0;
        for (double r = 0.0; r <= 10.0; r += 0.25) {
            const double closed = poisson_kernel(r, mp.dim);
            const double inv = fourier_inversion(r, 1.0, mp.dim);
            const double sub = subordination_kernel(r, 1.0, mp.dim);
            worst = std::max({worst, std::abs(inv - closed) / closed,
                              std::abs(sub - closed) / closed});
        }
        res.emplace_back("triple_agreement_max_rel", format_number(worst));
        const double sub_mass = quad::integrate_geometric(
            [](double s_) { return subordinator_density(s_, 1.0); }, 1e-12, 1e12, 220, 1e-14, 16);
        res.emplace_back("subordinator_mass", format_number(sub_mass));
    } else if (mp.theta < 2.0) {
        // scaling identity cross-checked by an independent inversion at t = 2
        double worst = 0.0;
        for (double r : {0.0, 0.5, 1.0, 2.0, 5.0}) {
            const double direct = fourier_inversion(r, mp.theta, mp.dim, 2.0);
            const double scaled = eval_kernel(r, 2.0, prof);
            worst = std::max(worst, std::abs(direct - scaled) / direct);
        }
        res.emplace_back("scaling_cross_check_rel", format_number(worst));
    }
}

void experiment_solve(const RunConfig& config, OutputTracker& out, Results& res) {
    const ConfigFile& cfg = config.raw;
    const ModelParams mp = parse_params(cfg);
    const Grid grid = parse_grid(cfg, mp);
    const TimeMesh mesh = parse_mesh(cfg);
    const InitialDatum datum = parse_datum(cfg, mp);
    const std::string mode = cfg.get_or("experiment", "mode", "march");

    if (mode == "march") {
        const MarchOptions mo = parse_march_options(cfg);
        const SolveOutcome sol = march(datum, mp, mesh, grid, mo);
        io::CsvWriter hist({"t", "sup_norm", "mass"});
        for (const auto& h : sol.history) hist.row_numbers({h.t, h.sup_norm, h.mass});
        out.write("norm_history.csv", hist.str());
        for (std::size_t i = 0; i < sol.snapshots.size(); ++i) {
            const std::string name = "field_" + std::to_string(i) + ".txt";
            io::write_field(sol.snapshots[i], (out.dir / name).string());
            out.names.push_back(name);
            out.write("slice_" + std::to_string(i) + ".csv",
                      io::field_slice_csv(sol.snapshots[i]));
        }
        res.emplace_back("status", status_name(sol.status));
        if (sol.status == SolveStatus::BlowUp) {
            res.emplace_back("t_est", format_number(sol.blowup_estimate()));
            res.emplace_back("t_lo", format_number(sol.t_lo));
            res.emplace_back("t_hi", format_number(sol.t_hi));
        }
        res.emplace_back("threshold", format_number(sol.threshold));
        res.emplace_back("max_undershoot", format_number(sol.max_undershoot));
        res.emplace_back("total_steps", std::to_string(sol.total_steps));
    } else if (mode == "picard") {
        const int sweeps = cfg.integer_or("experiment", "sweeps", 8);
        const PicardReport rep = picard_certify(datum, mp, mesh, grid, sweeps);
        res.emplace_back("monotonicity_defect", format_number(rep.monotonicity_defect));
        res.emplace_back("scale", format_number(rep.scale));
        res.emplace_back("march_distance", format_number(rep.march_distance));
        res.emplace_back("overflow", rep.overflow ? "true" : "false");
        io::CsvWriter csv({"sweep", "sup_norm"});
        for (std::size_t i = 0; i < rep.sweep_sup.size(); ++i)
            csv.row_numbers({double(i + 1), rep.sweep_sup[i]});
        out.write("picard_sweeps.csv", csv.str());
    } else if (mode == "supersolution") {
        const std::string kind_s = cfg.get("experiment", "construction");
        SupersolutionKind kind;
        if (kind_s == "scaled_semigroup")
            kind = SupersolutionKind::ScaledSemigroup;
        else if (kind_s == "alpha_mean")
            kind = SupersolutionKind::AlphaMean;
        else if (kind_s == "psi_transform")
            kind = SupersolutionKind::PsiTransform;
        else
            throw ConfigError("config: [experiment] construction '" + kind_s + "' is not known");
        const double ab = cfg.number_or("experiment", "alpha_or_beta",
                                        kind == SupersolutionKind::AlphaMean
                                            ? 0.5 * (1.0 + mp.p)
                                            : double(mp.dim) / mp.theta * 0.5);
        Eigen::ArrayXd samples;
        if (cfg.has("experiment", "sample_times")) {
            const std::vector<double> st = cfg.numbers("experiment", "sample_times");
            samples = Eigen::Map<const Eigen::ArrayXd>(st.data(), st.size());
        } else {
            samples.resize(8);
            for (int i = 0; i < 8; ++i) samples[i] = std::pow(2.0, -7 + i);
        }
        const int quad_nodes = cfg.integer_or("experiment", "quad_nodes", 64);
        const MarginReport rep = supersolution_check(kind, datum, mp, ab, grid, samples, quad_nodes);
        res.emplace_back("min_margin", format_number(rep.min_margin));
        res.emplace_back("scale", format_number(rep.scale));
        if (kind == SupersolutionKind::PsiTransform)
            res.emplace_back("psi_L", format_number(rep.psi_L));
        io::CsvWriter csv({"t", "margin"});
        for (Eigen::Index i = 0; i < rep.sample_times.size(); ++i)
            csv.row_numbers({rep.sample_times[i], rep.margins[i]});
        out.write("margins.csv", csv.str());
    } else {
        throw ConfigError("config: [experiment] mode '" + mode + "' is not known");
    }
}

void experiment_criteria(const RunConfig& config, OutputTracker& out, Results& res) {
    const ConfigFile& cfg = config.raw;
    const ModelParams mp = parse_params(cfg);
    const Grid grid = parse_grid(cfg, mp);
    const InitialDatum datum = parse_datum(cfg, mp);
    const double T = cfg.number_or("experiment", "horizon", 1.0);
    const Eigen::ArrayXd sigma = sigma_grid(cfg, mp, T);

    const BallScan scan = ball_sup_scan(datum, mp, grid, sigma);
    io::CsvWriter csv({"sigma", "sup_mass", "sup_average", "resolved"});
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        csv.row({format_number(scan.sigma[i]), format_number(scan.sup_mass[i]),
                 format_number(scan.sup_average[i]), scan.resolved[i] ? "1" : "0"});
    out.write("ballscan.csv", csv.str());

    const double nec_thresh =
        cfg.number_or("experiment", "necessary_pass_threshold",
                      std::numeric_limits<double>::quiet_NaN());
    const CriterionVerdict nec = check_necessary(scan, mp, T, nec_thresh);
    res.emplace_back("necessary_id", criterion_name(nec.id));
    res.emplace_back("necessary_constant", format_number(nec.measured_constant));
    if (std::isfinite(nec_thresh))
        res.emplace_back("necessary_passed", nec.passed ? "true" : "false");

    if (cfg.has("experiment", "sufficient_variant")) {
        const std::string v = cfg.get("experiment", "sufficient_variant");
        SufficientVariant variant;
        double ab = 0.0;
        if (v == "ball_mass") {
            variant = SufficientVariant::BallMass19;
        } else if (v == "alpha_mean") {
            variant = SufficientVariant::AlphaMean110;
            ab = cfg.number_or("experiment", "alpha", 0.5 * (1.0 + mp.p));
        } else if (v == "psi_log") {
            variant = SufficientVariant::PsiLog112;
            ab = cfg.number_or("experiment", "beta", 0.5 * mp.dim / mp.theta);
        } else {
            throw ConfigError("config: [experiment] sufficient_variant '" + v +
                              "' is not known");
        }
        const double suf_thresh =
            cfg.number_or("experiment", "sufficient_pass_threshold",
                          std::numeric_limits<double>::quiet_NaN());
        const CriterionVerdict suf =
            check_sufficient(datum, mp, grid, T, variant, ab, sigma, suf_thresh);
        res.emplace_back("sufficient_id", criterion_name(suf.id));
        res.emplace_back("sufficient_constant", format_number(suf.measured_constant));
        if (std::isfinite(suf_thresh))
            res.emplace_back("sufficient_passed", suf.passed ? "true" : "false");
    }

    if (cfg.flag_or("experiment", "trace", false)) {
        const TimeMesh mesh = parse_mesh(cfg);
        MarchOptions mo = parse_march_options(cfg);
        mo.snapshot_times = {mesh.node(1), mesh.node(2), mesh.node(4)};
        const SolveOutcome sol = march(datum, mp, mesh, grid, mo);
        const Field bump = make_bump(grid, 0.5 * grid.half_width);
        const TracePairing tp = initial_trace_pairing(sol.snapshots, bump);
        const double ref = datum_pairing(datum, mp, bump);
        res.emplace_back("trace_extrapolated", format_number(tp.extrapolated));
        res.emplace_back("trace_reference", format_number(ref));
        res.emplace_back("trace_residual", format_number(tp.residual));
    }
}

std::vector<double> parse_lambdas(const ConfigFile& cfg) {
    if (cfg.has("experiment", "lambdas")) return cfg.numbers("experiment", "lambdas");
    const double lo = cfg.number("experiment", "lambda_lo");
    const double hi = cfg.number("experiment", "lambda_hi");
    const int count = cfg.integer_or("experiment", "lambda_count", 8);
    if (!(lo > 0.0 && hi > lo) || count < 2)
        throw ConfigError("config: [experiment] bad lambda range");
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = lo * std::pow(hi / lo, double(i) / (count - 1));
    return out;
}

SweepConfig parse_sweep_config(const RunConfig& config) {
    const ConfigFile& cfg = config.raw;
    SweepConfig sc;
    sc.grid_points = cfg.integer_or("grid", "points", 4096);
    sc.mesh_steps = cfg.integer_or("mesh", "steps", 2048);
    sc.grading = cfg.number_or("mesh", "grading", 1.0);
    sc.box_min = cfg.number_or("experiment", "box_min", 16.0);
    sc.box_factor = cfg.number_or("experiment", "box_factor", 8.0);
    sc.budget_growth = cfg.number_or("experiment", "budget_growth", 4.0);
    sc.horizon_cap_factor = cfg.number_or("experiment", "horizon_cap_factor", 10.0);
    sc.jobs = config.jobs;
    sc.march = parse_march_options(cfg);
    return sc;
}

void write_sweep_csv(const std::vector<SweepRecord>& records, OutputTracker& out) {
    io::CsvWriter csv({"lambda", "t_est", "t_lo", "t_hi", "status", "box_half_width",
                       "grid_points", "mesh_steps", "budget_exhausted"});
    for (const SweepRecord& r : records)
        csv.row({format_number(r.lambda), format_number(r.t_est), format_number(r.t_lo),
                 format_number(r.t_hi), status_name(r.status), format_number(r.box_half_width),
                 std::to_string(r.grid_points), std::to_string(r.mesh_steps),
                 r.budget_exhausted ? "1" : "0"});
    out.write("sweep.csv", csv.str());
}

void write_fit_outputs(const FitResult& fit, const std::vector<SweepRecord>& records,
                       const TheoryLaw& law, OutputTracker& out, Results& res) {
    res.emplace_back("regime", lifespan_regime_name(fit.regime));
    res.emplace_back("fitted_slope", format_number(fit.slope));
    res.emplace_back("theory_slope", format_number(fit.theory_slope));
    res.emplace_back("intercept", format_number(fit.intercept));
    res.emplace_back("residual_max_rel", format_number(fit.residual_max_rel));
    res.emplace_back("used_records", std::to_string(fit.used_records));
    res.emplace_back("slope_drop_largest", format_number(fit.slope_drop_largest));

    std::ostringstream rep;
    rep << "life-span scaling fit\n";
    rep << "regime = " << lifespan_regime_name(fit.regime) << "\n";
    rep << "fitted_slope = " << format_number(fit.slope) << "\n";
    rep << "theory_slope = " << format_number(fit.theory_slope) << "\n";
    rep << "intercept = " << format_number(fit.intercept) << "\n";
    rep << "residual_max_rel = " << format_number(fit.residual_max_rel) << "\n";
    rep << "used_records = " << fit.used_records << "\n";
    rep << "slope_drop_largest = " << format_number(fit.slope_drop_largest) << "\n";
    out.write("fit_report.txt", rep.str());

    // plot data in the regime's coordinates: straight line when theory holds
    std::ostringstream plot;
    for (const SweepRecord& r : records) {
        if (r.status != SolveStatus::BlowUp) continue;
        double x = 0.0, y = 0.0;
        switch (law.regime) {
            case LifespanRegime::Power:
                x = std::log(r.lambda);
                y = std::log(r.t_est);
                break;
            case LifespanRegime::PowerLogAtN: {
                const double inv = 1.0 / r.lambda;
                x = std::log(inv / std::log(inv));
                y = std::log(r.t_est);
                break;
            }
            default:
                if (!(r.t_est > 1.0)) continue;
                x = std::log(r.lambda);
                y = std::log(std::log(r.t_est));
        }
        plot << format_number(x) << " " << format_number(y) << "\n";
    }
    out.write("plot_fit.dat", plot.str());
}

void experiment_sweep(const RunConfig& config, OutputTracker& out, Results& res) {
    const ConfigFile& cfg = config.raw;
    const ModelParams mp = parse_params(cfg);
    const double A = cfg.number("experiment", "decay");
    ClosedForm phi;
    phi.family = DatumFamily::PowerLaw;
    phi.decay = A;
    const std::vector<double> lambdas = parse_lambdas(cfg);
    const SweepConfig sc = parse_sweep_config(config);

    const std::vector<SweepRecord> records = lifespan_sweep(phi, A, lambdas, mp, sc);
    write_sweep_csv(records, out);
    const TheoryLaw law = predicted_exponent(mp, A);
    res.emplace_back("regime", lifespan_regime_name(law.regime));
    res.emplace_back("theory_slope", format_number(law.slope));
    int blowups = 0;
    for (const SweepRecord& r : records) blowups += r.status == SolveStatus::BlowUp;
    res.emplace_back("blowup_records", std::to_string(blowups));
    res.emplace_back("records", std::to_string(records.size()));

    if (cfg.flag_or("experiment", "fit", true) && blowups >= 4) {
        const FitResult fit = fit_scaling(records, law);
        write_fit_outputs(fit, records, law, out, res);
    }
}

void experiment_dichotomy(const RunConfig& config, OutputTracker& out, Results& res) {
    const ConfigFile& cfg = config.raw;
    const ModelParams mp = parse_params(cfg);
    const std::string profile_s = cfg.get_or("experiment", "profile", "singular");
    const DatumFamily profile =
        profile_s == "singular" ? DatumFamily::Singular : DatumFamily::CriticalLog;
    const double lo = cfg.number("experiment", "gamma_lo");
    const double hi = cfg.number("experiment", "gamma_hi");
    const double horizon = cfg.number_or("experiment", "horizon", 1.0);
    const double width = cfg.number_or("experiment", "rel_width", 0.2);
    std::vector<int> ladder;
    for (double g : cfg.numbers("experiment", "grids")) ladder.push_back(int(g));
    const SweepConfig sc = parse_sweep_config(config);

    const DichotomyResult dr =
        dichotomy_probe(mp, profile, lo, hi, horizon, width, ladder, sc);
    io::CsvWriter csv({"grid_points", "gamma_lo", "gamma_hi"});
    for (const DichotomyBracket& b : dr.brackets)
        csv.row({std::to_string(b.grid_points), format_number(b.gamma_lo),
                 format_number(b.gamma_hi)});
    out.write("dichotomy.csv", csv.str());
    res.emplace_back("overlapping", dr.overlapping ? "true" : "false");
    res.emplace_back("unresolved", dr.unresolved ? "true" : "false");
    res.emplace_back("drift", format_number(dr.drift));
    if (!dr.brackets.empty()) {
        res.emplace_back("gamma_lo", format_number(dr.brackets.back().gamma_lo));
        res.emplace_back("gamma_hi", format_number(dr.brackets.back().gamma_hi));
    }
}

std::vector<SweepRecord> read_sweep_csv(const std::string& path) {
    std::istringstream in(io::read_text(path));
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("fit: empty records file");
    std::vector<SweepRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() < 9) throw std::runtime_error("fit: malformed records row: " + line);
        SweepRecord r;
        r.lambda = std::stod(cells[0]);
        r.t_est = std::stod(cells[1]);
        r.t_lo = std::stod(cells[2]);
        r.t_hi = std::stod(cells[3]);
        r.status = cells[4] == "blow_up"
                       ? SolveStatus::BlowUp
                       : (cells[4] == "diverged" ? SolveStatus::Diverged : SolveStatus::Completed);
        r.box_half_width = std::stod(cells[5]);
        r.grid_points = std::stoi(cells[6]);
        r.mesh_steps = std::stoi(cells[7]);
        r.budget_exhausted = cells[8] == "1";
        records.push_back(r);
    }
    return records;
}

void experiment_fit(const RunConfig& config, OutputTracker& out, Results& res) {
    const ConfigFile& cfg = config.raw;
    const ModelParams mp = parse_params(cfg);
    const double A = cfg.number("experiment", "decay");
    const std::string records_path = cfg.get("experiment", "records");
    const std::vector<SweepRecord> records = read_sweep_csv(records_path);
    const TheoryLaw law = predicted_exponent(mp, A);
    const FitResult fit = fit_scaling(records, law);
    write_fit_outputs(fit, records, law, out, res);
}

} // namespace

RunConfig RunConfig::load(const std::string& config_path, const std::string& experiment,
                          const std::string& out_override, int jobs) {
    RunConfig rc;
    rc.raw = ConfigFile::parse_file(config_path);
    rc.experiment = experiment;
    const std::string cfg_kind = rc.raw.get_or("experiment", "kind", experiment);
    if (cfg_kind != experiment)
        throw ConfigError("config: [experiment] kind = " + cfg_kind +
                          " does not match the requested experiment " + experiment);
    rc.out_dir = !out_override.empty() ? out_override
                                       : rc.raw.get_or("experiment", "out", "runs/" + experiment);
    rc.jobs = jobs;
    return rc;
}

ModelParams RunConfig::params() const { return parse_params(raw); }

std::string run_experiment(const RunConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(config.out_dir);
    OutputTracker out{config.out_dir, {}};
    Results res;
    try {
        if (config.experiment == "kernel-check")
            experiment_kernel_check(config, out, res);
        else if (config.experiment == "solve")
            experiment_solve(config, out, res);
        else if (config.experiment == "criteria")
            experiment_criteria(config, out, res);
        else if (config.experiment == "sweep")
            experiment_sweep(config, out, res);
        else if (config.experiment == "dichotomy")
            experiment_dichotomy(config, out, res);
        else if (config.experiment == "fit")
            experiment_fit(config, out, res);
        else
            throw ConfigError("unknown experiment: " + config.experiment);
    } catch (...) {
        out.discard_all();
        throw;
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream man;
    man << "format = fracheat-manifest-1\n";
    man << "experiment = " << config.experiment << "\n";
    man << "version = " << kVersion << "\n";
    man << "wall_seconds = " << format_number(wall) << "\n";
    man << "\n[config]\n";
    for (const auto& [section, kv] : config.raw.sections())
        for (const auto& [k, v] : kv) man << section << "." << k << " = " << v << "\n";
    man << "\n[results]\n";
    for (const auto& [k, v] : res) man << k << " = " << v << "\n";
    man << "\n[files]\n";
    for (const std::string& name : out.names) {
        const std::string bytes = io::read_text((out.dir / name).string());
        man << name << " fnv1a=" << io::fnv1a_hex(bytes) << " bytes=" << bytes.size() << "\n";
    }
    const std::string manifest_path = (out.dir / "manifest.txt").string();
    io::write_text_atomic(manifest_path, man.str());
    return manifest_path;
}

void run_report(const std::vector<std::string>& manifest_paths, std::ostream& table,
                const std::string& out_dir) {
    if (manifest_paths.empty()) {
        table << "(no manifests)\n";
        return;
    }
    std::string experiment;
    std::vector<std::map<std::string, std::string>> rows;
    std::vector<std::string> keys; // first-seen order
    for (const std::string& path : manifest_paths) {
        std::istringstream in(io::read_text(path));
        std::string line, section, exp;
        std::map<std::string, std::string> row;
        row["manifest"] = path;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (line.front() == '[') {
                section = line;
                continue;
            }
            const auto eq = line.find(" = ");
            if (eq == std::string::npos) continue;
            const std::string k = line.substr(0, eq);
            const std::string v = line.substr(eq + 3);
            if (section.empty() && k == "experiment") exp = v;
            if (section == "[results]") {
                row[k] = v;
                if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
            }
        }
        if (experiment.empty())
            experiment = exp;
        else if (exp != experiment)
            throw std::runtime_error("report: mixed experiment types (" + experiment + " vs " +
                                     exp + ")");
        rows.push_back(std::move(row));
    }

    table << "experiment: " << experiment << "\n";
    table << "manifest";
    for (const std::string& k : keys) table << "\t" << k;
    table << "\n";
    io::CsvWriter csv([&] {
        std::vector<std::string> cols{"manifest"};
        cols.insert(cols.end(), keys.begin(), keys.end());
        return cols;
    }());
    for (const auto& row : rows) {
        table << row.at("manifest");
        std::vector<std::string> cells{row.at("manifest")};
        for (const std::string& k : keys) {
            const auto it = row.find(k);
            const std::string v = it == row.end() ? "" : it->second;
            table << "\t" << v;
            cells.push_back(v);
        }
        table << "\n";
        csv.row(cells);
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        io::write_text((fs::path(out_dir) / "report.csv").string(), csv.str());
    }
}

} // namespace fracheat
