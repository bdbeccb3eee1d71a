#include "fracheat/criteria.hpp"

#include "fracheat/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace fracheat {

double psi_beta(double s, double beta) {
    if (!(s >= 0.0)) throw std::invalid_argument("psi_beta: need s >= 0");
    return s * std::pow(std::log(M_E + s), beta);
}

double psi_beta_inv(double y, double beta) {
    if (!(y >= 0.0)) throw std::invalid_argument("psi_beta_inv: need y >= 0");
    if (y == 0.0) return 0.0;
    double lo = 0.0, hi = y; // Psi(s) >= s, so the preimage is <= y
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (psi_beta(mid, beta) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double rho(double s, const ModelParams& params) {
    if (!(s > 0.0)) throw std::invalid_argument("rho: need s > 0");
    const double n = params.dim;
    return std::pow(s, -n) * std::pow(std::log(M_E + 1.0 / s), -n / params.theta);
}

double psi_beta_L(double s, double beta, double L) {
    return s * std::pow(std::log(L + s), beta);
}

double psi_beta_L_inv(double y, double beta, double L) {
    if (!(y >= 0.0)) throw std::invalid_argument("psi_beta_L_inv: need y >= 0");
    if (y == 0.0) return 0.0;
    double lo = 0.0, hi = y; // L >= e makes Psi_{beta,L}(s) >= s
    if (psi_beta_L(hi, beta, L) < y)
        throw std::runtime_error("psi_beta_L_inv: bracket failure (L < e?)");
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (psi_beta_L(mid, beta, L) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double find_psi_L(double beta, double p) {
    if (!(beta > 0.0) || !(p > 1.0)) throw std::invalid_argument("find_psi_L: need beta > 0, p > 1");
    const auto ok = [&](double L) {
        for (double ls = -18.0; ls <= 18.0; ls += 0.05) {
            const double s = std::exp(ls);
            const double lg = std::log(L + s);
            // convexity: Psi'' = 2 beta lg^{b-1}/(L+s) + s beta lg^{b-2}((b-1) - lg)/(L+s)^2
            const double dd = 2.0 * beta * std::pow(lg, beta - 1.0) / (L + s) +
                              s * beta * std::pow(lg, beta - 2.0) * ((beta - 1.0) - lg) /
                                  ((L + s) * (L + s));
            if (dd < 0.0) return false;
            // s^p / Psi increasing  <=>  (p-1)(L+s) lg >= beta s
            if ((p - 1.0) * (L + s) * lg < beta * s) return false;
        }
        return true;
    };
    double L = M_E;
    for (int i = 0; i < 400; ++i) {
        if (ok(L)) return L;
        L *= 1.05;
    }
    throw std::runtime_error("find_psi_L: no admissible L found");
}

// ---------------------------------------------------------------------------
// ball scans

namespace {

struct PointCorrection {
    double x = 0.0, y = 0.0;
    double delta = 0.0; // exact mass to add when the ball covers the point
};

double periodic_distance(const Grid& g, double ax, double ay, double bx, double by) {
    const double dx = g.wrap(ax - bx);
    if (g.dim == 1) return std::abs(dx);
    return std::hypot(dx, g.wrap(ay - by));
}

BallScan scan_impl(const Eigen::ArrayXd& pointwise, const std::vector<PointCorrection>& corr,
                   const Grid& grid, const Eigen::ArrayXd& sigma, double alpha,
                   const SpectralWorkspace* ws_in, bool psi_mode, double psi_beta_value) {
    std::optional<SpectralWorkspace> local;
    if (!ws_in) local.emplace(grid, 1.0); // theta irrelevant for convolutions
    const SpectralWorkspace& ws = ws_in ? *ws_in : *local;

    const Eigen::Index n = grid.node_count();
    const double h = grid.spacing();
    const double cell = grid.cell_volume();

    BallScan scan;
    scan.sigma = sigma;
    scan.alpha = alpha;
    scan.sup_mass.resize(sigma.size());
    scan.sup_average.resize(sigma.size());
    scan.resolved.assign(sigma.size(), 1);
    scan.truncated.assign(sigma.size(), 0);

    Eigen::ArrayXd indicator(n);
    for (Eigen::Index s_i = 0; s_i < sigma.size(); ++s_i) {
        const double s = sigma[s_i];
        if (!(s > 0.0)) throw std::invalid_argument("ball_sup_scan: need sigma > 0");
        scan.resolved[s_i] = (s >= 2.0 * h) ? 1 : 0;
        scan.truncated[s_i] = (s > 0.5 * grid.half_width) ? 1 : 0;

        Eigen::Index inside = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool in = grid.radius(i) <= s * (1.0 + 1e-12);
            indicator[i] = in ? 1.0 : 0.0;
            inside += in;
        }
        Eigen::ArrayXd conv = ws.convolve(pointwise, indicator).max(0.0);
        // exact atom / singular-cell contributions per center
        if (!corr.empty()) {
            for (Eigen::Index i = 0; i < n; ++i) {
                double extra = 0.0;
                const int m = grid.points;
                const double cx = grid.dim == 1 ? grid.coord(static_cast<int>(i))
                                                : grid.coord(static_cast<int>(i / m));
                const double cy = grid.dim == 1 ? 0.0 : grid.coord(static_cast<int>(i % m));
                for (const PointCorrection& c : corr)
                    if (periodic_distance(grid, cx, cy, c.x, c.y) <= s * (1.0 + 1e-12))
                        extra += c.delta;
                conv[i] += extra;
            }
        }
        const double mass = conv.maxCoeff();
        const double ball_volume = double(inside) * cell; // discrete ball volume
        scan.sup_mass[s_i] = mass;
        const double avg = mass / ball_volume;
        if (psi_mode)
            scan.sup_average[s_i] = psi_beta_inv(avg, psi_beta_value);
        else
            scan.sup_average[s_i] = alpha == 1.0 ? avg : std::pow(avg, 1.0 / alpha);
    }
    return scan;
}

} // namespace

BallScan ball_sup_scan(const InitialDatum& datum, const ModelParams& params, const Grid& grid,
                       const Eigen::ArrayXd& sigma, double alpha, const SpectralWorkspace* ws) {
    if (!(alpha >= 1.0)) throw std::invalid_argument("ball_sup_scan: need alpha >= 1");
    if (alpha > 1.0 && !datum.atoms.empty())
        throw std::invalid_argument("ball_sup_scan: alpha-averages are undefined for atoms");

    Field density = materialize(datum, params, grid, /*include_atoms=*/false);
    Eigen::ArrayXd pw =
        alpha == 1.0 ? density.values : density.values.pow(alpha).eval();

    std::vector<PointCorrection> corr;
    for (const Atom& a : datum.atoms)
        corr.push_back({a.where[0], a.where[1], datum.amplitude * a.mass});
    if (datum.closed_form && datum.closed_form->singular_at_origin()) {
        const double h = grid.spacing();
        const double lam = datum.amplitude;
        const double exact = singular_cell_average_transformed(
            *datum.closed_form, params, h,
            [&](double v) { return std::pow(lam * v, alpha); });
        const Eigen::Index origin = grid.nearest_node(0.0, 0.0);
        const double sampled = std::pow(density.values[origin], alpha);
        corr.push_back({0.0, 0.0, (exact - sampled) * grid.cell_volume()});
    }
    return scan_impl(pw, corr, grid, sigma, alpha, ws, false, 0.0);
}

BallScan psi_ball_scan(const InitialDatum& datum, const ModelParams& params, const Grid& grid,
                       const Eigen::ArrayXd& sigma, double beta, double scale,
                       const SpectralWorkspace* ws) {
    if (!(beta > 0.0)) throw std::invalid_argument("psi_ball_scan: need beta > 0");
    if (!datum.atoms.empty())
        throw std::invalid_argument("psi_ball_scan: the Psi functional is undefined for atoms");

    Field density = materialize(datum, params, grid, /*include_atoms=*/false);
    Eigen::ArrayXd pw(density.values.size());
    for (Eigen::Index i = 0; i < pw.size(); ++i)
        pw[i] = psi_beta(scale * density.values[i], beta);

    std::vector<PointCorrection> corr;
    if (datum.closed_form && datum.closed_form->singular_at_origin()) {
        const double h = grid.spacing();
        const double lam = datum.amplitude;
        const double exact = singular_cell_average_transformed(
            *datum.closed_form, params, h,
            [&](double v) { return psi_beta(scale * lam * v, beta); });
        const Eigen::Index origin = grid.nearest_node(0.0, 0.0);
        corr.push_back({0.0, 0.0, (exact - pw[origin]) * grid.cell_volume()});
    }
    return scan_impl(pw, corr, grid, sigma, 1.0, ws, true, beta);
}

// ---------------------------------------------------------------------------
// verdicts

const char* criterion_name(CriterionId id) {
    switch (id) {
        case CriterionId::Necessary1: return "necessary_1";
        case CriterionId::Necessary2: return "necessary_2";
        case CriterionId::Necessary3: return "necessary_3";
        case CriterionId::Sufficient19: return "sufficient_1_9";
        case CriterionId::Sufficient110: return "sufficient_1_10";
        default: return "sufficient_1_12";
    }
}

namespace {

Eigen::Index locate_sigma(const BallScan& scan, double target) {
    for (Eigen::Index i = 0; i < scan.sigma.size(); ++i)
        if (std::abs(scan.sigma[i] - target) <= 1e-9 * target) return i;
    throw std::invalid_argument("criteria: scan does not contain the required radius sigma = " +
                                std::to_string(target));
}

void finish(CriterionVerdict& v, double threshold) {
    v.pass_threshold = threshold;
    v.passed = std::isfinite(threshold) && v.measured_constant <= threshold;
}

} // namespace

CriterionVerdict check_necessary(const BallScan& scan, const ModelParams& params, double T,
                                 double pass_threshold) {
    if (scan.alpha != 1.0)
        throw std::invalid_argument("check_necessary: needs a raw mass scan (alpha = 1)");
    const double root = std::pow(T, 1.0 / params.theta);
    const double n_over_theta = double(params.dim) / params.theta;
    CriterionVerdict v;
    v.sigma_lo = root;
    v.sigma_hi = root;
    switch (params.regime()) {
        case Regime::Subcritical: {
            v.id = CriterionId::Necessary1;
            const Eigen::Index i = locate_sigma(scan, root);
            v.measured_constant =
                scan.sup_mass[i] / std::pow(T, n_over_theta - 1.0 / (params.p - 1.0));
            break;
        }
        case Regime::Critical: {
            v.id = CriterionId::Necessary2;
            double best = 0.0, lo = root, hi = 0.0;
            for (Eigen::Index i = 0; i < scan.sigma.size(); ++i) {
                const double s = scan.sigma[i];
                if (s > root * (1.0 + 1e-12) || !scan.resolved[i]) continue;
                best = std::max(best, scan.sup_mass[i] *
                                          std::pow(std::log(M_E + root / s), n_over_theta));
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
            if (hi == 0.0) throw std::invalid_argument("check_necessary: no usable radii in scan");
            v.measured_constant = best;
            v.sigma_lo = lo;
            v.sigma_hi = hi;
            break;
        }
        case Regime::Supercritical: {
            v.id = CriterionId::Necessary3;
            double best = 0.0, lo = root, hi = 0.0;
            const double expo = double(params.dim) - params.theta / (params.p - 1.0);
            for (Eigen::Index i = 0; i < scan.sigma.size(); ++i) {
                const double s = scan.sigma[i];
                if (s > root * (1.0 + 1e-12) || !scan.resolved[i]) continue;
                best = std::max(best, scan.sup_mass[i] / std::pow(s, expo));
                lo = std::min(lo, s);
                hi = std::max(hi, s);
            }
            if (hi == 0.0) throw std::invalid_argument("check_necessary: no usable radii in scan");
            v.measured_constant = best;
            v.sigma_lo = lo;
            v.sigma_hi = hi;
            break;
        }
    }
    finish(v, pass_threshold);
    return v;
}

CriterionVerdict check_sufficient(const InitialDatum& datum, const ModelParams& params,
                                  const Grid& grid, double T, SufficientVariant variant,
                                  double alpha_or_beta, const Eigen::ArrayXd& sigma,
                                  double pass_threshold) {
    const double root = std::pow(T, 1.0 / params.theta);
    CriterionVerdict v;
    switch (variant) {
        case SufficientVariant::BallMass19: {
            if (params.regime() != Regime::Subcritical)
                throw std::invalid_argument("check_sufficient: (1.9) requires p < p_c");
            v.id = CriterionId::Sufficient19;
            Eigen::ArrayXd one(1);
            one[0] = root;
            const BallScan scan = ball_sup_scan(datum, params, grid, one);
            v.measured_constant =
                scan.sup_mass[0] /
                std::pow(T, double(params.dim) / params.theta - 1.0 / (params.p - 1.0));
            v.sigma_lo = v.sigma_hi = root;
            break;
        }
        case SufficientVariant::AlphaMean110: {
            const double alpha = alpha_or_beta;
            if (!(alpha > 1.0 && alpha < params.p))
                throw std::invalid_argument("check_sufficient: (1.10) requires 1 < alpha < p");
            v.id = CriterionId::Sufficient110;
            const BallScan scan = ball_sup_scan(datum, params, grid, sigma, alpha);
            double best = 0.0, lo = root, hi = 0.0;
            const double expo = params.theta / (params.p - 1.0);
            for (Eigen::Index i = 0; i < sigma.size(); ++i) {
                if (sigma[i] > root * (1.0 + 1e-12) || !scan.resolved[i]) continue;
                best = std::max(best, scan.sup_average[i] * std::pow(sigma[i], expo));
                lo = std::min(lo, sigma[i]);
                hi = std::max(hi, sigma[i]);
            }
            if (hi == 0.0)
                throw std::invalid_argument("check_sufficient: no usable radii in range");
            v.measured_constant = best;
            v.sigma_lo = lo;
            v.sigma_hi = hi;
            break;
        }
        case SufficientVariant::PsiLog112: {
            const double beta = alpha_or_beta;
            if (params.regime() != Regime::Critical)
                throw std::invalid_argument("check_sufficient: (1.12) requires p = p_c");
            if (!(beta > 0.0))
                throw std::invalid_argument("check_sufficient: (1.12) requires beta > 0");
            v.id = CriterionId::Sufficient112;
            const double scale = std::pow(T, 1.0 / (params.p - 1.0));
            const BallScan scan = psi_ball_scan(datum, params, grid, sigma, beta, scale);
            double best = 0.0, lo = root, hi = 0.0;
            for (Eigen::Index i = 0; i < sigma.size(); ++i) {
                if (sigma[i] > root * (1.0 + 1e-12) || !scan.resolved[i]) continue;
                best = std::max(best, scan.sup_average[i] / rho(sigma[i] / root, params));
                lo = std::min(lo, sigma[i]);
                hi = std::max(hi, sigma[i]);
            }
            if (hi == 0.0)
                throw std::invalid_argument("check_sufficient: no usable radii in range");
            v.measured_constant = best;
            v.sigma_lo = lo;
            v.sigma_hi = hi;
            break;
        }
    }
    finish(v, pass_threshold);
    return v;
}

// ---------------------------------------------------------------------------
// initial trace pairing

TracePairing initial_trace_pairing(const std::vector<Field>& history, const Field& test_function) {
    if (history.empty()) throw std::invalid_argument("initial_trace_pairing: empty history");
    std::vector<const Field*> sorted;
    for (const Field& f : history) sorted.push_back(&f);
    std::sort(sorted.begin(), sorted.end(),
              [](const Field* a, const Field* b) { return a->time < b->time; });

    TracePairing tp;
    tp.times.resize(sorted.size());
    tp.values.resize(sorted.size());
    const double cell = test_function.grid.cell_volume();
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!(sorted[i]->grid == test_function.grid))
            throw std::invalid_argument("initial_trace_pairing: grid mismatch");
        tp.times[i] = sorted[i]->time;
        tp.values[i] = (sorted[i]->values * test_function.values).sum() * cell;
    }
    if (sorted.size() == 1) {
        tp.extrapolated = tp.values[0];
        tp.residual = 0.0;
        return tp;
    }
    const double t0 = tp.times[0], t1 = tp.times[1];
    const double linear = tp.values[0] + (tp.values[0] - tp.values[1]) * t0 / (t1 - t0);
    if (sorted.size() == 2) {
        tp.extrapolated = linear;
        tp.residual = std::abs(linear - tp.values[0]);
        return tp;
    }
    // quadratic Lagrange through the three earliest times, evaluated at t = 0
    const double t2 = tp.times[2];
    const double l0 = (0 - t1) * (0 - t2) / ((t0 - t1) * (t0 - t2));
    const double l1 = (0 - t0) * (0 - t2) / ((t1 - t0) * (t1 - t2));
    const double l2 = (0 - t0) * (0 - t1) / ((t2 - t0) * (t2 - t1));
    tp.extrapolated = l0 * tp.values[0] + l1 * tp.values[1] + l2 * tp.values[2];
    tp.residual = std::abs(tp.extrapolated - linear);
    return tp;
}

double datum_pairing(const InitialDatum& datum, const ModelParams& params,
                     const Field& test_function) {
    const Field mu = materialize(datum, params, test_function.grid);
    return (mu.values * test_function.values).sum() * test_function.grid.cell_volume();
}

Field make_bump(const Grid& grid, double radius) {
    Field f = make_field(grid);
    for (Eigen::Index i = 0; i < grid.node_count(); ++i) {
        const double q = grid.radius(i) / radius;
        f.values[i] = q < 1.0 ? std::pow(1.0 - q * q, 3) : 0.0;
    }
    return f;
}

} // namespace fracheat
