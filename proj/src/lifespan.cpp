#include "fracheat/lifespan.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

namespace fracheat {

const char* lifespan_regime_name(LifespanRegime r) {
    switch (r) {
        case LifespanRegime::Power: return "power";
        case LifespanRegime::PowerLogAtN: return "power_log_at_N";
        case LifespanRegime::LogLaw: return "log_law";
        case LifespanRegime::LogLawAtN: return "log_law_at_N";
        default: return "global_possible";
    }
}

TheoryLaw predicted_exponent(const ModelParams& params, double A) {
    params.validate();
    if (!(A > 0.0)) throw std::invalid_argument("predicted_exponent: need A > 0");
    const double N = params.dim;
    const double pm1 = params.p - 1.0;
    const double decay_cut = params.theta / pm1; // theta/(p-1)
    TheoryLaw law;
    switch (params.regime()) {
        case Regime::Critical:
            // here theta/(p-1) = N
            if (A > N) {
                law.regime = LifespanRegime::LogLaw;
                law.slope = -pm1;
            } else if (A == N) {
                law.regime = LifespanRegime::LogLawAtN;
                law.slope = -pm1 / params.p;
            } else {
                law.regime = LifespanRegime::Power;
                law.slope = -1.0 / (1.0 / pm1 - A / params.theta);
            }
            return law;
        case Regime::Subcritical: {
            const double m = std::min(A, N);
            if (A == N) {
                law.regime = LifespanRegime::PowerLogAtN;
                law.slope = 1.0 / (1.0 / pm1 - N / params.theta);
            } else {
                law.regime = LifespanRegime::Power;
                law.slope = -1.0 / (1.0 / pm1 - m / params.theta);
            }
            return law;
        }
        case Regime::Supercritical:
            if (A < decay_cut) {
                // A < theta/(p-1) < N, so min{A, N} = A
                law.regime = LifespanRegime::Power;
                law.slope = -1.0 / (1.0 / pm1 - A / params.theta);
                return law;
            }
            if (A == decay_cut) {
                law.boundary = true; // undecided between finite law and global existence
                law.regime = LifespanRegime::GlobalPossible;
                return law;
            }
            law.regime = LifespanRegime::GlobalPossible;
            return law;
    }
    return law;
}

namespace {

// theory-law horizon scale with unit constant, for the per-lambda budget cap
double predicted_horizon(const TheoryLaw& law, const ModelParams& params, double lambda) {
    switch (law.regime) {
        case LifespanRegime::Power: return std::pow(lambda, law.slope);
        case LifespanRegime::PowerLogAtN: {
            const double x = 1.0 / lambda;
            return std::pow(x / std::max(std::log(x), 1.0), law.slope);
        }
        case LifespanRegime::LogLaw:
        case LifespanRegime::LogLawAtN:
            return std::exp(std::pow(lambda, law.slope));
        default: return std::numeric_limits<double>::infinity();
    }
}

SweepRecord run_point(const ClosedForm& phi, double lambda, const ModelParams& params,
                      const TheoryLaw& law, const SweepConfig& config) {
    SweepRecord rec;
    rec.lambda = lambda;
    rec.grid_points = config.grid_points;
    rec.mesh_steps = config.mesh_steps;
    if (lambda == 0.0) { // zero datum never blows up
        rec.status = SolveStatus::Completed;
        rec.budget_exhausted = true;
        return rec;
    }
    InitialDatum datum = closed_form_datum(phi, lambda);
    datum.cell_average_core = true; // boxes scale with the horizon; keep sampling mass-faithful

    // spatially-constant comparison: life span of v' = v^p from sup lambda phi
    const double sup0 = lambda; // phi(0) = 1 for the implemented families
    double budget = 2.0 * std::pow(sup0, 1.0 - params.p) / (params.p - 1.0);
    const double cap = config.horizon_cap_factor *
                       std::max(predicted_horizon(law, params, lambda), budget);
    bool seen_blowup = false;
    while (true) {
        Grid grid;
        grid.dim = params.dim;
        grid.points = config.grid_points;
        grid.half_width =
            std::max(config.box_min, config.box_factor * std::pow(budget, 1.0 / params.theta));
        TimeMesh mesh{budget, config.mesh_steps, config.grading};
        const SolveOutcome out = march(datum, params, mesh, grid, config.march);
        rec.box_half_width = grid.half_width;
        rec.threshold = out.threshold;
        rec.status = out.status;
        if (out.status == SolveStatus::BlowUp) {
            rec.t_lo = out.t_lo;
            rec.t_hi = out.t_hi;
            rec.t_est = out.blowup_estimate();
            if (seen_blowup) return rec;
            // rerun once with a tight horizon so the box (and h) match T_est
            seen_blowup = true;
            budget = 1.35 * rec.t_est;
            continue;
        }
        if (out.status == SolveStatus::Diverged) return rec;
        if (budget > cap && !seen_blowup) {
            rec.budget_exhausted = true;
            return rec;
        }
        budget *= seen_blowup ? 1.5 : config.budget_growth;
    }
}

} // namespace

std::vector<SweepRecord> lifespan_sweep(const ClosedForm& phi, double A,
                                        const std::vector<double>& lambdas,
                                        const ModelParams& params, const SweepConfig& config) {
    params.validate();
    if (lambdas.empty()) throw std::invalid_argument("lifespan_sweep: empty amplitude list");
    const TheoryLaw law = predicted_exponent(params, A);

    std::vector<SweepRecord> records(lambdas.size());
    const int jobs = std::max(1, config.jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < lambdas.size(); ++i)
            records[i] = run_point(phi, lambdas[i], params, law, config);
    } else {
        std::mutex mtx;
        std::size_t next = 0;
        std::exception_ptr failure;
        auto worker = [&] {
            while (true) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(mtx);
                    if (next >= lambdas.size() || failure) return;
                    i = next++;
                }
                try {
                    SweepRecord rec = run_point(phi, lambdas[i], params, law, config);
                    std::lock_guard<std::mutex> lock(mtx);
                    records[i] = rec;
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mtx);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }
    // deterministic order: amplitude descending
    std::sort(records.begin(), records.end(),
              [](const SweepRecord& a, const SweepRecord& b) { return a.lambda > b.lambda; });
    return records;
}

namespace {

struct LinearFit {
    double slope = 0.0, intercept = 0.0;
};

LinearFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = double(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    LinearFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

} // namespace

FitResult fit_scaling(const std::vector<SweepRecord>& records, const TheoryLaw& law) {
    std::vector<double> xs, ys, ts, lams;
    for (const SweepRecord& rec : records) {
        if (rec.status != SolveStatus::BlowUp) continue;
        double x, y;
        switch (law.regime) {
            case LifespanRegime::Power:
                x = std::log(rec.lambda);
                y = std::log(rec.t_est);
                break;
            case LifespanRegime::PowerLogAtN: {
                const double inv = 1.0 / rec.lambda;
                x = std::log(inv / std::log(inv));
                y = std::log(rec.t_est);
                break;
            }
            case LifespanRegime::LogLaw:
            case LifespanRegime::LogLawAtN:
                if (!(rec.t_est > 1.0)) continue; // log log undefined
                x = std::log(rec.lambda);
                y = std::log(std::log(rec.t_est));
                break;
            default:
                throw std::invalid_argument("fit_scaling: no finite law in this regime");
        }
        xs.push_back(x);
        ys.push_back(y);
        ts.push_back(rec.t_est);
        lams.push_back(rec.lambda);
    }
    if (xs.size() < 4)
        throw std::runtime_error("fit_scaling: need at least 4 blow-up records");
    const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
    if (*xmax - *xmin < std::log(10.0) * 0.99)
        throw std::runtime_error("fit_scaling: records span less than a decade");

    const LinearFit main = least_squares(xs, ys);
    FitResult fit;
    fit.regime = law.regime;
    fit.theory_slope = law.slope;
    fit.slope = main.slope;
    fit.intercept = main.intercept;
    fit.used_records = int(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double y_hat = fit.intercept + fit.slope * xs[i];
        double t_hat = std::exp(y_hat);
        double t_obs = ts[i];
        if (law.regime == LifespanRegime::LogLaw || law.regime == LifespanRegime::LogLawAtN) {
            t_hat = std::exp(t_hat);
        }
        fit.residual_max_rel = std::max(fit.residual_max_rel, std::abs(t_obs - t_hat) / t_hat);
    }
    // the laws are asymptotic in lambda -> 0: refit without the largest amplitude
    fit.slope_drop_largest = fit.slope;
    if (xs.size() > 4) {
        const std::size_t drop =
            std::max_element(lams.begin(), lams.end()) - lams.begin();
        std::vector<double> xs2, ys2;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i == drop) continue;
            xs2.push_back(xs[i]);
            ys2.push_back(ys[i]);
        }
        fit.slope_drop_largest = least_squares(xs2, ys2).slope;
    }
    return fit;
}

DichotomyResult dichotomy_probe(const ModelParams& params, DatumFamily profile, double gamma_lo,
                                double gamma_hi, double horizon, double rel_width,
                                const std::vector<int>& grid_ladder, const SweepConfig& config) {
    params.validate();
    if (!(gamma_lo >= 0.0 && gamma_hi > gamma_lo))
        throw std::invalid_argument("dichotomy_probe: need 0 <= gamma_lo < gamma_hi");
    if (grid_ladder.size() < 2)
        throw std::invalid_argument("dichotomy_probe: need at least two grids in the ladder");

    ClosedForm cf;
    if (profile == DatumFamily::Singular) {
        if (params.regime() != Regime::Supercritical)
            throw std::invalid_argument(
                "dichotomy_probe: the scale-invariant singular profile needs p > p_c");
        cf.family = DatumFamily::Singular;
        cf.exponent = params.singular_exponent();
    } else if (profile == DatumFamily::CriticalLog) {
        if (params.regime() != Regime::Critical)
            throw std::invalid_argument("dichotomy_probe: the log-refined profile needs p = p_c");
        cf.family = DatumFamily::CriticalLog;
        cf.offset = 0.0;
    } else {
        throw std::invalid_argument("dichotomy_probe: profile must be Singular or CriticalLog");
    }

    const double box = std::max(config.box_min,
                                config.box_factor * std::pow(horizon, 1.0 / params.theta));
    const auto blows = [&](double gamma, int points) {
        cf.strength = gamma;
        Grid grid;
        grid.dim = params.dim;
        grid.points = points;
        grid.half_width = box;
        TimeMesh mesh{horizon, config.mesh_steps, config.grading};
        const SolveOutcome out = march(closed_form_datum(cf), params, mesh, grid, config.march);
        if (out.status == SolveStatus::Diverged)
            throw std::runtime_error("dichotomy_probe: solver diverged at gamma = " +
                                     std::to_string(gamma));
        return out.status == SolveStatus::BlowUp;
    };

    DichotomyResult res;
    for (std::size_t g = 0; g < grid_ladder.size(); ++g) {
        const int points = grid_ladder[g];
        double lo = gamma_lo, hi = gamma_hi;
        const bool lo_blows = lo > 0.0 && blows(lo, points);
        const bool hi_blows = blows(hi, points);
        if (g == 0 && (lo_blows || !hi_blows))
            throw std::invalid_argument(
                "dichotomy_probe: bracket endpoints do not behave differently "
                "at the coarsest grid");
        if (lo_blows || !hi_blows) {
            res.unresolved = true; // refinement flipped an endpoint
            break;
        }
        while (hi - lo > rel_width * 0.5 * (hi + lo)) {
            const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
            (blows(mid, points) ? hi : lo) = mid;
        }
        res.brackets.push_back({points, lo, hi});
    }
    if (res.brackets.size() >= 2) {
        bool overlap = true;
        for (std::size_t i = 1; i < res.brackets.size(); ++i) {
            overlap = overlap && res.brackets[i].gamma_lo <= res.brackets[i - 1].gamma_hi &&
                      res.brackets[i - 1].gamma_lo <= res.brackets[i].gamma_hi;
        }
        res.overlapping = overlap;
        const double m0 = 0.5 * (res.brackets.front().gamma_lo + res.brackets.front().gamma_hi);
        const double m1 = 0.5 * (res.brackets.back().gamma_lo + res.brackets.back().gamma_hi);
        res.drift = std::abs(m1 - m0) / m0;
        if (!overlap) res.unresolved = true;
    } else {
        res.unresolved = true;
    }
    return res;
}

} // namespace fracheat
