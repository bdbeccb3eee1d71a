#include "fracheat/datum.hpp"

#include "fracheat/quadrature.hpp"

#include <cmath>

namespace fracheat {

namespace {

double log_weight(double r, double beta) { return std::pow(std::log(M_E + 1.0 / r), -beta); }

// I_beta(R) = int_0^R [log(e + 1/r)]^{-beta-1} dr / r, exactly via
// d/dr [log(e+1/r)]^{-beta} = beta [log(e+1/r)]^{-beta-1} / (r (e r + 1)).
double critical_log_radial_integral(double R, double beta) {
    const auto v = [&](double r) { return log_weight(r, beta); };
    const double int_v = quad::integrate_geometric(v, 0.0, R, 60, 1e-25, 16);
    return (M_E * R + 1.0) * v(R) / beta - M_E * int_v / beta;
}

} // namespace

double closed_form_value(const ClosedForm& cf, const ModelParams& params, double r) {
    r = std::abs(r);
    switch (cf.family) {
        case DatumFamily::Constant: return cf.offset;
        case DatumFamily::PowerLaw: return std::pow(1.0 + r, -cf.decay);
        case DatumFamily::Singular: return cf.strength * std::pow(r, -cf.exponent);
        case DatumFamily::CriticalLog: {
            const double beta_c = double(params.dim) / params.theta + 1.0;
            return cf.strength * std::pow(r, -double(params.dim)) *
                       std::pow(std::log(M_E + 1.0 / r), -beta_c) +
                   cf.offset;
        }
    }
    return 0.0;
}

void InitialDatum::validate(const ModelParams& params) const {
    if (!density && atoms.empty() && !closed_form)
        throw std::invalid_argument("InitialDatum: need at least one of density/atoms/closed_form");
    if (!(amplitude >= 0.0)) throw std::invalid_argument("InitialDatum.amplitude: need >= 0");
    for (const Atom& a : atoms)
        if (!(a.mass >= 0.0)) throw std::invalid_argument("InitialDatum.atoms: need mass >= 0");
    if (closed_form) {
        const ClosedForm& cf = *closed_form;
        if (cf.family == DatumFamily::Singular) {
            if (!(cf.strength >= 0.0))
                throw std::invalid_argument("InitialDatum: Singular strength must be >= 0");
            if (cf.strength > 0.0 && cf.exponent >= params.dim)
                throw std::invalid_argument(
                    "InitialDatum: Singular exponent a >= N is not locally integrable");
        }
        if (cf.family == DatumFamily::CriticalLog && !(cf.strength >= 0.0 && cf.offset >= 0.0))
            throw std::invalid_argument("InitialDatum: CriticalLog needs gamma, C >= 0");
        if (cf.family == DatumFamily::PowerLaw && !(cf.decay > 0.0))
            throw std::invalid_argument("InitialDatum: PowerLaw needs A > 0");
    }
    if (density && (density->values < 0.0).any())
        throw std::invalid_argument("InitialDatum.density: negative values");
}

InitialDatum constant_datum(double value) {
    InitialDatum d;
    d.closed_form = ClosedForm{DatumFamily::Constant, 0.0, 0.0, 0.0, value};
    return d;
}

InitialDatum closed_form_datum(const ClosedForm& cf, double amplitude) {
    InitialDatum d;
    d.closed_form = cf;
    d.amplitude = amplitude;
    return d;
}

InitialDatum atom_datum(double x, double mass) {
    InitialDatum d;
    d.atoms.push_back(Atom{{x, 0.0}, mass});
    return d;
}

double singular_cell_average(const ClosedForm& cf, const ModelParams& params, double h) {
    const double R = 0.5 * h;
    if (cf.family == DatumFamily::Constant) return cf.offset;
    if (cf.family == DatumFamily::PowerLaw)
        throw std::invalid_argument("singular_cell_average: PowerLaw has no singularity");
    if (cf.family == DatumFamily::Singular && cf.strength > 0.0 && cf.exponent >= params.dim)
        throw std::invalid_argument("singular_cell_average: a >= N is not integrable");
    // radial primitive F(R) = int_0^R f(r) r^{N-1} dr for the singular families
    const auto radial_primitive = [&](double radius) -> double {
        if (cf.family == DatumFamily::Singular) {
            const double expo = double(params.dim) - cf.exponent;
            return cf.strength * std::pow(radius, expo) / expo;
        }
        const double beta = double(params.dim) / params.theta;
        return cf.strength * critical_log_radial_integral(radius, beta) +
               cf.offset * std::pow(radius, params.dim) / params.dim;
    };

    if (params.dim == 1) return 2.0 / h * radial_primitive(R);

    // N = 2: inscribed disc exactly, square corners by angular quadrature
    const double disc = 2.0 * M_PI * radial_primitive(R);
    const auto corner = [&](double phi) {
        const double r_edge = R / std::cos(phi);
        return radial_primitive(r_edge) - radial_primitive(R);
    };
    const double corners = 8.0 * quad::panel(corner, 0.0, 0.25 * M_PI, quad::gauss_legendre(16));
    return (disc + corners) / (h * h);
}

double singular_cell_average_transformed(const ClosedForm& cf, const ModelParams& params,
                                         double h,
                                         const std::function<double(double)>& transform) {
    const double R = 0.5 * h;
    const int N = params.dim;
    // integrand in w = log(1/r): g(e^{-w}) e^{-N w}
    const auto in_w = [&](double w) {
        const double r = std::exp(-w);
        return transform(closed_form_value(cf, params, r)) * std::exp(-double(N) * w);
    };
    const auto divergent = [] {
        return std::invalid_argument(
            "singular_cell_average_transformed: cell integral diverges "
            "(transformed singularity is not locally integrable)");
    };
    const double w0 = -std::log(R);
    const double w_max = 600.0;
    double acc = 0.0;
    const quad::GaussRule& rule = quad::gauss_legendre(16);
    double lo = w0, len = 0.5;
    while (lo < w_max) {
        const double hi = std::min(lo + len, w_max);
        const double piece = quad::panel(in_w, lo, hi, rule);
        if (!std::isfinite(piece)) throw divergent();
        acc += piece;
        lo = hi;
        len *= 1.25;
    }
    // power-behaved remainder: fit the local decay exponent at w_max
    const double g1 = in_w(w_max), g2 = in_w(w_max * 1.05);
    if (!std::isfinite(g1) || !std::isfinite(g2)) throw divergent();
    if (g1 > 1e-280) {
        const double q = -(std::log(g2) - std::log(g1)) / std::log(1.05);
        if (!(q > 1.02)) throw divergent();
        acc += g1 * w_max / (q - 1.0);
    }
    // acc now holds int_0^R g(r) r^{N-1} dr
    if (N == 1) return 2.0 / h * acc;
    const auto g_radial = [&](double r) {
        return transform(closed_form_value(cf, params, r)) * r;
    };
    const auto corner = [&](double phi) {
        const double r_edge = R / std::cos(phi);
        return quad::panel(g_radial, R, r_edge, rule);
    };
    const double corners = 8.0 * quad::panel(corner, 0.0, 0.25 * M_PI, rule);
    return (2.0 * M_PI * acc + corners) / (h * h);
}

Field materialize(const InitialDatum& datum, const ModelParams& params, const Grid& grid,
                  bool include_atoms) {
    datum.validate(params);
    grid.validate();
    Field out = make_field(grid, 0.0);

    if (datum.density) {
        if (!(datum.density->grid == grid))
            throw std::invalid_argument("materialize: density lives on a different grid");
        out.values = datum.density->values;
    }
    if (datum.closed_form) {
        const ClosedForm& cf = *datum.closed_form;
        const Eigen::Index n = grid.node_count();
        for (Eigen::Index i = 0; i < n; ++i)
            out.values[i] += closed_form_value(cf, params, grid.radius(i));
        if (datum.cell_average_core) {
            // per-cell Gauss average where the profile varies across a cell
            const double h = grid.spacing();
            const quad::GaussRule& rule = quad::gauss_legendre(16);
            const auto average_1d = [&](double xc) {
                return quad::panel([&](double x) { return closed_form_value(cf, params, x); },
                                   xc - 0.5 * h, xc + 0.5 * h, rule) /
                       h;
            };
            for (Eigen::Index i = 0; i < n; ++i) {
                if (grid.dim == 1) {
                    const double x = grid.coord(static_cast<int>(i));
                    if (std::abs(x) > 4.0 * h || x == 0.0) continue;
                    out.values[i] += average_1d(x) - closed_form_value(cf, params, x);
                } else {
                    const double x = grid.coord(static_cast<int>(i / grid.points));
                    const double y = grid.coord(static_cast<int>(i % grid.points));
                    if (std::max(std::abs(x), std::abs(y)) > 4.0 * h || (x == 0.0 && y == 0.0))
                        continue;
                    const auto row = [&](double yy) {
                        return quad::panel(
                                   [&](double xx) {
                                       return closed_form_value(cf, params, std::hypot(xx, yy));
                                   },
                                   x - 0.5 * h, x + 0.5 * h, rule) /
                               h;
                    };
                    const double avg =
                        quad::panel(row, y - 0.5 * h, y + 0.5 * h, rule) / h;
                    out.values[i] += avg - closed_form_value(cf, params, std::hypot(x, y));
                }
            }
            if (!cf.singular_at_origin()) {
                const Eigen::Index origin = grid.nearest_node(0.0, 0.0);
                out.values[origin] = singular_cell_average_transformed(
                    cf, params, h, [](double v) { return v; });
                if (datum.density) out.values[origin] += datum.density->values[origin];
            }
        }
        if (cf.singular_at_origin()) {
            const Eigen::Index origin = grid.nearest_node(0.0, 0.0);
            out.values[origin] = singular_cell_average(cf, params, grid.spacing());
            if (datum.density) out.values[origin] += datum.density->values[origin];
        }
    }
    out.values *= datum.amplitude;
    if (include_atoms) {
        const double inv_cell = 1.0 / grid.cell_volume();
        for (const Atom& a : datum.atoms) {
            const Eigen::Index node = grid.nearest_node(a.where[0], a.where[1]);
            out.values[node] += datum.amplitude * a.mass * inv_cell;
        }
    }
    if (!out.values.isFinite().all())
        throw std::invalid_argument("materialize: non-finite samples (unresolvable datum)");
    return out;
}

} // namespace fracheat
