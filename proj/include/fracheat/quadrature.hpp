#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace fracheat::quad {

struct GaussRule {
    Eigen::ArrayXd nodes;   // on [-1, 1]
    Eigen::ArrayXd weights;
};

// Gauss-Legendre rule of the given order (nodes computed once, cached).
const GaussRule& gauss_legendre(int order);

template <class F>
double panel(F&& f, double a, double b, const GaussRule& rule) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return acc * half;
}

// Composite Gauss with panel edges clustered geometrically toward `a`.
// Handles integrable endpoint kinks (e.g. exp(-x^theta) with theta < 1).
template <class F>
double integrate_geometric(F&& f, double a, double b, int panels = 32,
                           double first_fraction = 1e-12, int order = 16) {
    if (!(b > a)) return 0.0;
    const GaussRule& rule = gauss_legendre(order);
    const double len = b - a;
    const double ratio = std::pow(first_fraction, -1.0 / (panels - 1));
    double acc = 0.0;
    double lo = a;
    double frac = first_fraction;
    for (int k = 0; k < panels; ++k) {
        const double hi = (k + 1 == panels) ? b : a + len * frac;
        acc += panel(f, lo, hi, rule);
        lo = hi;
        frac *= ratio;
    }
    return acc;
}

// Limit of a sequence of partial sums via Wynn's epsilon algorithm.
// Falls back to the last entry when the table degenerates.
double wynn_limit(const std::vector<double>& partial_sums);

// Sum_{j>=0} term(j) for a series whose terms eventually alternate and decay
// smoothly. Terms are summed directly until |term| < abs_tol or j = direct;
// if the series has not converged by then, Wynn acceleration is applied to
// the next `accel` partial sums.
template <class Term>
double alternating_series(Term&& term, int direct, int accel, double abs_tol) {
    double sum = 0.0, comp = 0.0; // Kahan
    auto add = [&](double v) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    };
    int small_run = 0;
    for (int j = 0; j < direct; ++j) {
        const double a = term(j);
        add(a);
        small_run = (std::abs(a) < abs_tol) ? small_run + 1 : 0;
        if (small_run >= 3) return sum;
    }
    std::vector<double> partials;
    partials.reserve(accel);
    for (int j = direct; j < direct + accel; ++j) {
        add(term(j));
        partials.push_back(sum);
    }
    return wynn_limit(partials);
}

} // namespace fracheat::quad
