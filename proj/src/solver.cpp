#include "fracheat/solver.hpp"

#include "fracheat/criteria.hpp"
#include "fracheat/semigroup.hpp"

#include <algorithm>
#include <cmath>

namespace fracheat {

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Completed: return "completed";
        case SolveStatus::BlowUp: return "blow_up";
        default: return "diverged";
    }
}

namespace {

struct Stepper {
    const SpectralWorkspace& ws;
    const double p;
    const double cap;
    double max_undershoot = 0.0;
    long steps = 0;

    // dt above which the local growth u' = u^p is under-resolved
    double cap_dt(double sup) const {
        return sup > 0.0 ? cap * std::pow(sup, 1.0 - p) / p : std::numeric_limits<double>::infinity();
    }

    Eigen::ArrayXd advance(const Eigen::ArrayXd& u, double dt) {
        const Eigen::ArrayXd np = u.pow(p);
        double m1 = 0.0, m2 = 0.0;
        const Eigen::ArrayXd pred = ws.evolve_combination(u, 1.0, np, dt, dt, &m1);
        Eigen::ArrayXd next = ws.evolve_combination(u, 1.0, np, 0.5 * dt, dt, &m2);
        next += (0.5 * dt) * pred.pow(p);
        max_undershoot = std::max({max_undershoot, -m1, -m2, 0.0});
        ++steps;
        return next;
    }
};

bool crossed(const Eigen::ArrayXd& v, double threshold) {
    return !v.isFinite().all() || v.maxCoeff() > threshold;
}

struct Crossing {
    double t_lo, t_hi;
};

// Advance u from t toward `target`; returns a crossing bracket if the
// threshold is passed on the way. On a crossing, u holds the last state below
// the threshold (at time t_lo). A crossing interval wider than the requested
// relative width is re-stepped at dt/8 from the same state; accepted steps
// relax the refinement again.
std::optional<Crossing> advance_to(Eigen::ArrayXd& u, double& t, double target, double threshold,
                                   double width_rel, Stepper& st) {
    double forced_dt = std::numeric_limits<double>::infinity();
    while (t < target) {
        const double t_res = std::max(t, 1e-300) * 1e-13;
        if (target - t < t_res) { // already at the target to within time resolution
            t = target;
            break;
        }
        const double growth_dt = std::min(st.cap_dt(u.maxCoeff()), forced_dt);
        if (growth_dt < t_res) {
            // remaining time to the crossing is below time resolution
            return Crossing{t, t + std::max(growth_dt, t_res)};
        }
        const double dt = std::min(target - t, growth_dt);
        Eigen::ArrayXd next = st.advance(u, dt);
        if (crossed(next, threshold)) {
            if (dt <= width_rel * (t + dt)) return Crossing{t, t + dt};
            forced_dt = dt / 8.0;
            continue; // retry from the same state at finer resolution
        }
        u = std::move(next);
        t += dt;
        forced_dt *= 2.0;
    }
    return std::nullopt;
}

} // namespace

SolveOutcome march(const InitialDatum& datum, const ModelParams& params, const TimeMesh& mesh,
                   const Grid& grid, const MarchOptions& opts) {
    params.validate();
    mesh.validate();
    grid.validate();
    const double reach = std::pow(mesh.horizon, 1.0 / params.theta);
    if (grid.half_width < 2.0 * reach)
        throw std::invalid_argument("march: box too small for the horizon (need L >= 2 T^{1/theta})");

    SpectralWorkspace ws(grid, params.theta);
    Field state = materialize(datum, params, grid);
    state.values = state.values.max(0.0);

    SolveOutcome out;
    const double t1 = mesh.node(1);
    {
        Eigen::ArrayXd s1 = state.values;
        ws.apply_multiplier(s1, t1);
        const double lin_sup = s1.maxCoeff();
        out.threshold = opts.blowup_threshold > 0.0 ? opts.blowup_threshold
                                                    : opts.threshold_factor * lin_sup;
        if (opts.blowup_threshold > 0.0 && opts.blowup_threshold <= lin_sup)
            throw std::invalid_argument("march: threshold must exceed ||S(t_1) mu||");
    }

    // mesh nodes plus requested snapshot times, ascending
    std::vector<double> targets;
    for (int k = 1; k <= mesh.steps; ++k) targets.push_back(mesh.node(k));
    std::vector<double> snaps = opts.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    for (double s : snaps)
        if (s > 0.0 && s < mesh.horizon) targets.push_back(s);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    const auto wants_snapshot = [&](double t) {
        for (double s : snaps)
            if (std::abs(s - t) <= 1e-12 * std::max(1.0, std::abs(s))) return true;
        return false;
    };

    Stepper st{ws, params.p, opts.growth_cap};
    out.history.push_back({0.0, state.values.maxCoeff(), state.mass()});

    double t = 0.0;
    Eigen::ArrayXd u = state.values;
    Eigen::ArrayXd ckpt_u = u; // last completed target, for certification
    double ckpt_t = 0.0;

    std::optional<Crossing> crossing;
    for (double target : targets) {
        crossing = advance_to(u, t, target, out.threshold, opts.bracket_rel_width, st);
        if (crossing) break;
        out.history.push_back({t, u.maxCoeff(), u.sum() * grid.cell_volume()});
        if (wants_snapshot(t)) {
            Field snap;
            snap.grid = grid;
            snap.time = t;
            snap.values = u;
            out.snapshots.push_back(std::move(snap));
        }
        ckpt_u = u;
        ckpt_t = t;
    }

    out.total_steps = st.steps;
    out.max_undershoot = st.max_undershoot;
    out.final_field.grid = grid;

    if (!crossing) {
        out.status = SolveStatus::Completed;
        out.final_field.time = t;
        out.final_field.values = std::move(u);
        return out;
    }

    out.t_lo = crossing->t_lo;
    out.t_hi = crossing->t_hi;
    out.final_field.time = ckpt_t;
    out.final_field.values = ckpt_u;

    // certification: the crossing must be reproduced with halved growth cap
    Stepper half{ws, params.p, 0.5 * opts.growth_cap};
    Eigen::ArrayXd v = ckpt_u;
    double tv = ckpt_t;
    const double t_est = out.blowup_estimate();
    const double horizon2 = std::min(mesh.horizon, ckpt_t + 2.2 * (t_est - ckpt_t) + 4.0 * (out.t_hi - out.t_lo));
    const auto cross2 = advance_to(v, tv, std::max(horizon2, out.t_hi), out.threshold,
                                   opts.bracket_rel_width, half);
    if (cross2) {
        const double shift = std::abs(0.5 * (cross2->t_lo + cross2->t_hi) - t_est);
        out.certified_shift = shift;
        const double tol =
            std::max({0.25 * (t_est - ckpt_t), 4.0 * (out.t_hi - out.t_lo), 0.01 * t_est});
        out.status = shift <= tol ? SolveStatus::BlowUp : SolveStatus::Diverged;
    } else {
        out.status = SolveStatus::Diverged; // crossing vanished under refinement
    }
    out.total_steps = st.steps + half.steps;
    out.max_undershoot = std::max(st.max_undershoot, half.max_undershoot);
    return out;
}

PicardReport picard_certify(const InitialDatum& datum, const ModelParams& params,
                            const TimeMesh& mesh, const Grid& grid, int sweeps) {
    if (sweeps < 2) throw std::invalid_argument("picard_certify: need sweeps >= 2");
    params.validate();
    mesh.validate();
    grid.validate();
    SpectralWorkspace ws(grid, params.theta);

    const int K = mesh.steps;
    std::vector<double> t(K + 1);
    for (int k = 0; k <= K; ++k) t[k] = mesh.node(k);

    Field mu = materialize(datum, params, grid);
    mu.values = mu.values.max(0.0);

    // u1(t_k) = S(t_k) mu
    std::vector<Eigen::ArrayXd> lin(K + 1), cur(K + 1);
    for (int k = 0; k <= K; ++k) {
        lin[k] = mu.values;
        ws.apply_multiplier(lin[k], t[k]);
        cur[k] = lin[k];
    }

    PicardReport rep;
    rep.sweep_sup.push_back(
        std::max_element(cur.begin(), cur.end(), [](const auto& a, const auto& b) {
            return a.maxCoeff() < b.maxCoeff();
        })->maxCoeff());

    const double p = params.p;
    for (int n = 1; n < sweeps; ++n) {
        std::vector<Eigen::ArrayXd> pw(K + 1);
        for (int k = 0; k <= K; ++k) pw[k] = cur[k].pow(p);
        std::vector<Eigen::ArrayXd> next(K + 1);
        next[0] = lin[0];
        bool overflow = false;
        for (int k = 1; k <= K && !overflow; ++k) {
            Eigen::ArrayXd acc = lin[k];
            for (int j = 0; j <= k; ++j) {
                const double w_lo = j > 0 ? 0.5 * (t[j] - t[j - 1]) : 0.0;
                const double w_hi = j < k ? 0.5 * (t[j + 1] - t[j]) : 0.0;
                const double w = w_lo + w_hi;
                Eigen::ArrayXd term = pw[j];
                ws.apply_multiplier(term, t[k] - t[j]);
                acc += w * term;
            }
            if (!acc.isFinite().all() || acc.maxCoeff() > 1e100) overflow = true;
            next[k] = std::move(acc);
        }
        if (overflow) {
            rep.overflow = true;
            break;
        }
        double defect = 0.0, sup = 0.0;
        for (int k = 0; k <= K; ++k) {
            defect = std::max(defect, (cur[k] - next[k]).maxCoeff());
            sup = std::max(sup, next[k].maxCoeff());
        }
        rep.monotonicity_defect = std::max(rep.monotonicity_defect, std::max(defect, 0.0));
        rep.sweep_sup.push_back(sup);
        cur = std::move(next);
    }
    for (int k = 0; k <= K; ++k) rep.scale = std::max(rep.scale, cur[k].maxCoeff());

    // distance to the marching solver on the same mesh
    MarchOptions mo;
    mo.snapshot_times.assign(t.begin() + 1, t.end() - 1);
    const SolveOutcome res = march(datum, params, mesh, grid, mo);
    double dist = (cur[0] - mu.values).abs().maxCoeff();
    for (const Field& snap : res.snapshots) {
        for (int k = 1; k < K; ++k) {
            if (std::abs(snap.time - t[k]) <= 1e-12 * std::max(1.0, t[k])) {
                dist = std::max(dist, (cur[k] - snap.values).abs().maxCoeff());
                break;
            }
        }
    }
    if (res.status == SolveStatus::Completed)
        dist = std::max(dist, (cur[K] - res.final_field.values).abs().maxCoeff());
    rep.march_distance = dist;
    return rep;
}

MarginReport supersolution_check(SupersolutionKind kind, const InitialDatum& datum,
                                 const ModelParams& params, double alpha_or_beta,
                                 const Grid& grid, const Eigen::ArrayXd& sample_times,
                                 int quad_nodes) {
    params.validate();
    grid.validate();
    if (quad_nodes < 8) throw std::invalid_argument("supersolution_check: need quad_nodes >= 8");
    for (Eigen::Index i = 0; i < sample_times.size(); ++i)
        if (!(sample_times[i] > 0.0 && sample_times[i] <= 1.0))
            throw std::invalid_argument("supersolution_check: samples must lie in (0, 1]");

    SpectralWorkspace ws(grid, params.theta);
    Field mu = materialize(datum, params, grid);
    mu.values = mu.values.max(0.0);

    MarginReport rep;
    rep.sample_times = sample_times;
    rep.margins.resize(sample_times.size());

    const double p = params.p;
    double psi_L = 0.0;
    Eigen::ArrayXd transformed;
    switch (kind) {
        case SupersolutionKind::ScaledSemigroup:
            transformed = mu.values;
            break;
        case SupersolutionKind::AlphaMean:
            if (!(alpha_or_beta > 1.0 && alpha_or_beta < p))
                throw std::invalid_argument("supersolution_check: alpha must lie in (1, p)");
            transformed = mu.values.pow(alpha_or_beta);
            break;
        case SupersolutionKind::PsiTransform: {
            if (!(alpha_or_beta > 0.0))
                throw std::invalid_argument("supersolution_check: beta must be positive");
            psi_L = find_psi_L(alpha_or_beta, p);
            transformed.resize(mu.values.size());
            for (Eigen::Index i = 0; i < transformed.size(); ++i)
                transformed[i] = psi_beta_L(mu.values[i], alpha_or_beta, psi_L);
            break;
        }
    }
    rep.psi_L = psi_L;

    const auto w_of = [&](double s) -> Eigen::ArrayXd {
        Eigen::ArrayXd v = transformed;
        ws.apply_multiplier(v, s);
        switch (kind) {
            case SupersolutionKind::ScaledSemigroup: return v;
            case SupersolutionKind::AlphaMean: return v.pow(1.0 / alpha_or_beta);
            default: {
                Eigen::ArrayXd w(v.size());
                for (Eigen::Index i = 0; i < v.size(); ++i)
                    w[i] = psi_beta_L_inv(v[i], alpha_or_beta, psi_L);
                return w;
            }
        }
    };

    double scale = 0.0;
    for (Eigen::Index s_i = 0; s_i < sample_times.size(); ++s_i) {
        const double t = sample_times[s_i];
        Eigen::ArrayXd f = mu.values; // S(t) mu
        ws.apply_multiplier(f, t);
        // graded trapezoid over s in [0, t] of S(t-s)(2 w(s))^p
        double prev_s = 0.0;
        Eigen::ArrayXd prev_term = (2.0 * mu.values).pow(p); // w(0) = mu
        ws.apply_multiplier(prev_term, t);
        Eigen::ArrayXd w_t;
        for (int j = 1; j <= quad_nodes; ++j) {
            const double s = t * std::pow(double(j) / quad_nodes, 2.0);
            Eigen::ArrayXd w_s = w_of(s);
            Eigen::ArrayXd term = (2.0 * w_s).pow(p);
            ws.apply_multiplier(term, t - s);
            f += 0.5 * (s - prev_s) * (prev_term + term);
            prev_s = s;
            prev_term = std::move(term);
            if (j == quad_nodes) w_t = std::move(w_s);
        }
        const Eigen::ArrayXd margin_field = 2.0 * w_t - f;
        rep.margins[s_i] = margin_field.minCoeff();
        scale = std::max(scale, 2.0 * w_t.maxCoeff());
    }
    rep.min_margin = rep.margins.minCoeff();
    rep.scale = scale;
    return rep;
}

WeisslerReport weissler_bound(const std::vector<Field>& snapshots, const ModelParams& params,
                              const std::vector<double>& t_list) {
    if (snapshots.empty() || t_list.empty())
        throw std::invalid_argument("weissler_bound: need snapshots and probe times");
    SpectralWorkspace ws(snapshots.front().grid, params.theta);
    WeisslerReport rep;
    rep.table.resize(snapshots.size(), t_list.size());
    const double expo = 1.0 / (params.p - 1.0);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
        double row_max = 0.0;
        for (std::size_t j = 0; j < t_list.size(); ++j) {
            Eigen::ArrayXd v = snapshots[i].values;
            ws.apply_multiplier(v, t_list[j]);
            const double val = std::pow(t_list[j], expo) * v.maxCoeff();
            rep.table(i, j) = val;
            row_max = std::max(row_max, val);
        }
        rep.kappa = std::max(rep.kappa, row_max);
        lo = std::min(lo, row_max);
        hi = std::max(hi, row_max);
    }
    rep.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    return rep;
}

AprioriBoundReport apriori_ball_bound(const SolveOutcome& outcome, const ModelParams& params) {
    if (outcome.status != SolveStatus::BlowUp)
        throw std::invalid_argument("apriori_ball_bound: needs a blow-up outcome");
    if (outcome.snapshots.empty())
        throw std::invalid_argument("apriori_ball_bound: outcome has no snapshots");
    const double T = outcome.blowup_estimate();
    AprioriBoundReport rep;
    std::vector<double> times, ratios;
    for (const Field& snap : outcome.snapshots) {
        const double gap = T - snap.time;
        if (!(gap > 0.0)) continue;
        InitialDatum d;
        d.density = snap;
        d.density->time = 0.0;
        Eigen::ArrayXd sigma(1);
        sigma[0] = std::pow(gap, 1.0 / params.theta);
        const BallScan scan = ball_sup_scan(d, params, snap.grid, sigma);
        times.push_back(snap.time);
        ratios.push_back(scan.sup_average[0] * std::pow(gap, 1.0 / (params.p - 1.0)));
    }
    if (times.empty()) throw std::invalid_argument("apriori_ball_bound: no usable snapshots");
    rep.times = Eigen::Map<Eigen::ArrayXd>(times.data(), times.size());
    rep.ratios = Eigen::Map<Eigen::ArrayXd>(ratios.data(), ratios.size());
    rep.spread = rep.ratios.maxCoeff() / rep.ratios.minCoeff();
    return rep;
}

} // namespace fracheat
