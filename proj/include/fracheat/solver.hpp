#pragma once

#include "fracheat/datum.hpp"
#include "fracheat/grid.hpp"
#include "fracheat/model.hpp"

#include <vector>

namespace fracheat {

// Graded time mesh t_k = T (k/K)^q; q > 1 resolves the t -> 0 transient of
// S(t)mu for rough data.
struct TimeMesh {
    double horizon = 1.0;
    int steps = 512;
    double grading = 1.0;

    double node(int k) const {
        return horizon * std::pow(double(k) / steps, grading);
    }
    void validate() const {
        if (!(horizon > 0.0)) throw std::invalid_argument("TimeMesh.horizon: need T > 0");
        if (steps < 2) throw std::invalid_argument("TimeMesh.steps: need K >= 2");
        if (!(grading >= 1.0)) throw std::invalid_argument("TimeMesh.grading: need q >= 1");
    }
};

enum class SolveStatus { Completed, BlowUp, Diverged };

const char* status_name(SolveStatus s);

struct SolveOutcome {
    SolveStatus status = SolveStatus::Completed;
    double t_lo = 0.0, t_hi = 0.0; // blow-up bracket
    double blowup_estimate() const { return 0.5 * (t_lo + t_hi); }

    struct HistoryEntry {
        double t, sup_norm, mass;
    };
    std::vector<HistoryEntry> history; // strictly increasing times
    Field final_field;                 // last completed state
    std::vector<Field> snapshots;      // at the requested times that were reached

    // diagnostics
    double threshold = 0.0;
    double max_undershoot = 0.0; // largest pre-clamp negative magnitude
    long total_steps = 0;
    double certified_shift = 0.0; // crossing drift under step-halving
};

struct MarchOptions {
    double blowup_threshold = 0.0;   // 0 -> threshold_factor * ||S(t_1)mu||_inf
    double threshold_factor = 1e8;
    double bracket_rel_width = 0.005; // requested |t_hi - t_lo| / T_est
    double growth_cap = 0.05;         // dt <= cap * ||u||^{1-p} / p
    std::vector<double> snapshot_times;
};

// Duhamel marching integrator: one exponential-Euler predictor plus one
// trapezoidal corrector per step,
//   u* = S(dt)(u + dt u^p),   u_next = S(dt)(u + dt/2 u^p) + dt/2 (u*)^p,
// with growth-capped sub-steps inside each mesh interval. A threshold crossing
// is bracketed to the requested width and certified stable under one
// step-halving; an unstable crossing is reported as Diverged.
SolveOutcome march(const InitialDatum& datum, const ModelParams& params, const TimeMesh& mesh,
                   const Grid& grid, const MarchOptions& opts = {});

struct PicardReport {
    double monotonicity_defect = 0.0; // max over sweeps, nodes, times of (u_n - u_{n+1})_+
    double scale = 0.0;               // ||u_last||_inf over the trajectory
    double march_distance = 0.0;      // sup |u_last - march| over mesh nodes
    std::vector<double> sweep_sup;    // sup norm of each iterate
    bool overflow = false;            // a sweep escaped to +inf (nonexistence evidence)
};

// Full-trajectory monotone iteration u_n(t) = S(t)mu + int_0^t S(t-s) u_{n-1}(s)^p ds
// on a coarse mesh; certifies the discrete analogue of the minimal-solution
// construction and measures its distance to the marching solver.
PicardReport picard_certify(const InitialDatum& datum, const ModelParams& params,
                            const TimeMesh& mesh, const Grid& grid, int sweeps);

enum class SupersolutionKind { ScaledSemigroup, AlphaMean, PsiTransform };

struct MarginReport {
    Eigen::ArrayXd sample_times;
    Eigen::ArrayXd margins;    // min over nodes of 2w - F[w] per sample
    double min_margin = 0.0;
    double scale = 0.0;        // max ||2w||_inf over samples
    double psi_L = 0.0;        // L used by the PsiTransform construction
};

// Evaluates F[w](t) = S(t)mu + int_0^t S(t-s) (2 w(s))^p ds on the unit horizon
// for one of the three candidate supersolutions
//   w = S(t)mu,  w = [S(t)mu^alpha]^{1/alpha},  w = Psi_{beta,L}^{-1}[S(t)Psi_{beta,L}(mu)].
// A nonnegative margin certifies F[w] <= 2w numerically at the samples;
// a negative margin is a valid "fails at this amplitude" answer.
MarginReport supersolution_check(SupersolutionKind kind, const InitialDatum& datum,
                                 const ModelParams& params, double alpha_or_beta,
                                 const Grid& grid, const Eigen::ArrayXd& sample_times,
                                 int quad_nodes = 64);

struct WeisslerReport {
    double kappa = 0.0;  // max over (tau, t) of t^{1/(p-1)} ||S(t) u(tau)||_inf
    double spread = 0.0; // max over tau / min over tau of the per-tau suprema
    Eigen::ArrayXXd table; // rows: tau, cols: t
};

// Measures the smoothing bound ||S(t) u(tau)|| <= kappa t^{-1/(p-1)} on stored
// solution snapshots; kappa must stay finite and tau-stable.
WeisslerReport weissler_bound(const std::vector<Field>& snapshots, const ModelParams& params,
                              const std::vector<double>& t_list);

struct AprioriBoundReport {
    Eigen::ArrayXd times;
    Eigen::ArrayXd ratios; // (T-t)^{1/(p-1)} sup_x avg_{B(x,(T-t)^{1/theta})} u(.,t)
    double spread = 0.0;
};

// Blow-up rate bound of the ball averages near T_est, computed from the
// snapshots of a blow-up outcome.
AprioriBoundReport apriori_ball_bound(const SolveOutcome& outcome, const ModelParams& params);

} // namespace fracheat
