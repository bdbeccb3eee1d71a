#pragma once

#include "fracheat/datum.hpp"
#include "fracheat/model.hpp"
#include "fracheat/solver.hpp"

#include <vector>

namespace fracheat {

// Which small-amplitude life-span law applies to mu = lambda (1+|x|)^{-A}.
enum class LifespanRegime {
    Power,          // T ~ lambda^{-(1/(p-1) - min(A,N)/theta)^{-1}}
    PowerLogAtN,    // A = N, p < p_c: T ~ (lambda^{-1}/log lambda^{-1})^{(1/(p-1)-N/theta)^{-1}}
    LogLaw,         // p = p_c, A > N: log T ~ lambda^{-(p-1)}
    LogLawAtN,      // p = p_c, A = N: log T ~ lambda^{-(p-1)/p}
    GlobalPossible, // p > p_c, A > theta/(p-1): no finite law for small lambda
};

const char* lifespan_regime_name(LifespanRegime r);

struct TheoryLaw {
    LifespanRegime regime = LifespanRegime::Power;
    // slope of the straight line in the regime's fit coordinates (see fit_scaling)
    double slope = 0.0;
    bool boundary = false; // A sits on a regime boundary other than A = N
};

// Case split of the two-sided life-span estimates; pure in (params, A).
TheoryLaw predicted_exponent(const ModelParams& params, double A);

struct SweepRecord {
    double lambda = 0.0;
    SolveStatus status = SolveStatus::Completed;
    double t_lo = 0.0, t_hi = 0.0;
    double t_est = 0.0; // 0 when no blow-up was found within the budget
    double box_half_width = 0.0;
    int grid_points = 0;
    int mesh_steps = 0;
    double threshold = 0.0;
    bool budget_exhausted = false;
};

struct SweepConfig {
    int grid_points = 4096;
    int mesh_steps = 2048;
    double grading = 1.0;
    double box_min = 16.0;
    double box_factor = 8.0;       // L = max(box_min, box_factor * B^{1/theta})
    double budget_growth = 4.0;    // horizon multiplier between attempts
    double horizon_cap_factor = 10.0; // cap = factor * T_pred(lambda)
    int jobs = 1;
    MarchOptions march;
};

// One life-span estimate per amplitude for mu = lambda phi, phi the given
// closed form with decay A. Horizon budgets start at the spatially-constant
// comparison bound and grow geometrically; the box is rescaled with the
// budget. Amplitudes run as independent jobs; records return sorted by lambda
// descending.
std::vector<SweepRecord> lifespan_sweep(const ClosedForm& phi, double A,
                                        const std::vector<double>& lambdas,
                                        const ModelParams& params, const SweepConfig& config);

struct FitResult {
    LifespanRegime regime = LifespanRegime::Power;
    double slope = 0.0;
    double intercept = 0.0;
    double residual_max_rel = 0.0; // max relative deviation of T from the fitted law
    double theory_slope = 0.0;
    int used_records = 0;
    // window-sensitivity diagnostic: slope refitted without the largest
    // amplitude (the laws hold only for small enough lambda)
    double slope_drop_largest = 0.0;
};

// Least squares in the regime's coordinates:
//   Power:       log T  vs log lambda
//   PowerLogAtN: log T  vs log(lambda^{-1} / log lambda^{-1})
//   LogLaw(.):   log log T vs log lambda
FitResult fit_scaling(const std::vector<SweepRecord>& records, const TheoryLaw& law);

struct DichotomyBracket {
    int grid_points = 0;
    double gamma_lo = 0.0; // largest amplitude observed surviving the horizon
    double gamma_hi = 0.0; // smallest amplitude observed blowing up before it
};

struct DichotomyResult {
    std::vector<DichotomyBracket> brackets; // one per grid of the ladder
    bool overlapping = false;               // consecutive brackets intersect
    double drift = 0.0;                     // relative midpoint drift across the ladder
    bool unresolved = false;                // classification flipped beyond tolerance
};

// Bisect the singular-profile strength gamma between "survives the horizon"
// and "blows up before it" on each grid of the ladder. The deliverable is a
// bracket stable under refinement; the paper's threshold itself is never claimed.
DichotomyResult dichotomy_probe(const ModelParams& params, DatumFamily profile, double gamma_lo,
                                double gamma_hi, double horizon, double rel_width,
                                const std::vector<int>& grid_ladder, const SweepConfig& config);

} // namespace fracheat
