#include "fracheat/kernel.hpp"

#include "fracheat/grid.hpp"
#include "fracheat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fracheat {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// exp(-t xi^theta) is numerically zero beyond this frequency.
double frequency_cutoff(double theta, double t) {
    return std::pow(41.5 / t, 1.0 / theta);
}

// j-th positive zero of cos(r xi) in xi, j = 0, 1, ...
double cosine_zero(double r, int j) { return (j + 0.5) * M_PI / r; }

// j-th positive zero of J0(r xi) in xi (McMahon expansion; panel edges only).
double bessel_zero(double r, int j) {
    const double b = (j + 0.75) * M_PI;
    return (b + 0.125 / b) / r;
}

} // namespace

double gaussian_kernel(double r, int dim, double t) {
    return std::pow(4.0 * M_PI * t, -0.5 * dim) * std::exp(-r * r / (4.0 * t));
}

double poisson_kernel(double r, int dim, double t) {
    // c_N t / (t^2 + r^2)^{(N+1)/2}, c_N = Gamma((N+1)/2) / pi^{(N+1)/2}
    const double cn = std::tgamma(0.5 * (dim + 1)) / std::pow(M_PI, 0.5 * (dim + 1));
    return cn * t * std::pow(t * t + r * r, -0.5 * (dim + 1));
}

namespace {

struct InversionBudget {
    int head_panels = 40;
    int direct_terms = 512;
    int accel_terms = 64;
};

double invert_symbol(double r, double theta, int dim, double t, const InversionBudget& bud) {
    const double xi_cut = frequency_cutoff(theta, t);
    const auto integrand = [&](double xi) {
        const double damp = std::exp(-t * std::pow(xi, theta));
        if (dim == 1) return damp * std::cos(r * xi);
        return damp * std::cyl_bessel_j(0.0, r * xi) * xi;
    };
    const auto zero = [&](int j) {
        return dim == 1 ? cosine_zero(r, j) : bessel_zero(r, j);
    };

    const double norm = (dim == 1) ? 1.0 / M_PI : 1.0 / kTwoPi;
    const double head_end = (r > 0.0) ? std::min(zero(0), xi_cut) : xi_cut;
    // integrable kink of xi^theta at 0 -> geometric panels toward 0
    double acc = quad::integrate_geometric(integrand, 0.0, head_end, bud.head_panels, 1e-12, 16);
    if (head_end >= xi_cut) return norm * acc;

    const quad::GaussRule& rule = quad::gauss_legendre(16);
    const auto term = [&](int j) {
        const double a = zero(j);
        const double b = std::min(zero(j + 1), xi_cut);
        return (b > a) ? quad::panel(integrand, a, b, rule) : 0.0;
    };
    acc += quad::alternating_series(term, bud.direct_terms, bud.accel_terms, 1e-18);
    return norm * acc;
}

} // namespace

double fourier_inversion(double r, double theta, int dim, double t) {
    if (!(theta > 0.0 && theta < 2.0))
        throw std::invalid_argument("fourier_inversion: need 0 < theta < 2");
    if (dim != 1 && dim != 2)
        throw std::invalid_argument("fourier_inversion: radial inversion supports N = 1, 2");
    if (!(t > 0.0)) throw std::invalid_argument("fourier_inversion: need t > 0");
    return invert_symbol(r, theta, dim, t, InversionBudget{});
}

double subordinator_density(double s, double t, double theta) {
    if (theta != 1.0)
        throw std::invalid_argument(
            "subordinator_density: only theta = 1 has an elementary closed form; "
            "the general contour integral is out of scope");
    if (!(s > 0.0) || !(t > 0.0))
        throw std::invalid_argument("subordinator_density: need s > 0, t > 0");
    return t * std::pow(4.0 * M_PI, -0.5) * std::pow(s, -1.5) * std::exp(-t * t / (4.0 * s));
}

double subordination_kernel(double r, double t, int dim) {
    // integrand peaks near s* = (t^2 + r^2) / (2 (N + 3)); integrate on log scale
    const double c = t * t + r * r;
    const double s_star = c / (2.0 * (dim + 3.0));
    const auto f = [&](double y) {
        const double s = std::exp(y);
        return subordinator_density(s, t) * std::pow(4.0 * M_PI * s, -0.5 * dim) *
               std::exp(-r * r / (4.0 * s)) * s; // ds = s dy
    };
    const double y_lo = std::log(s_star) - 60.0;
    const double y_hi = std::log(s_star) + 60.0;
    const quad::GaussRule& rule = quad::gauss_legendre(16);
    double acc = 0.0;
    const int panels = 96;
    for (int k = 0; k < panels; ++k) {
        const double a = y_lo + (y_hi - y_lo) * k / panels;
        const double b = y_lo + (y_hi - y_lo) * (k + 1) / panels;
        acc += quad::panel(f, a, b, rule);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// profile construction

void KernelProfile::finalize() {
    const Eigen::Index n = radii.size();
    if (n < 8) throw KernelBuildError("kernel profile: too few samples");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]))
            throw KernelBuildError("kernel profile: non-positive value at r = " +
                                   std::to_string(radii[i]));
        if (i > 0 && values[i] > values[i - 1] * (1.0 + 1e-12))
            throw KernelBuildError("kernel profile: radial monotonicity violated at r = " +
                                   std::to_string(radii[i]));
    }

    // monotone cubic (Fritsch-Carlson) over (log r, log G), excluding the r = 0 node
    const Eigen::Index m = n - 1;
    log_r_.resize(m);
    log_v_.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        log_r_[i] = std::log(radii[i + 1]);
        log_v_[i] = std::log(values[i + 1]);
    }
    Eigen::ArrayXd d(m - 1);
    for (Eigen::Index i = 0; i + 1 < m; ++i)
        d[i] = (log_v_[i + 1] - log_v_[i]) / (log_r_[i + 1] - log_r_[i]);
    slope_.resize(m);
    slope_[0] = d[0];
    slope_[m - 1] = d[m - 2];
    for (Eigen::Index i = 1; i + 1 < m; ++i) slope_[i] = 0.5 * (d[i - 1] + d[i]);
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        if (d[i] == 0.0) {
            slope_[i] = slope_[i + 1] = 0.0;
            continue;
        }
        const double a = slope_[i] / d[i];
        const double b = slope_[i + 1] / d[i];
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            slope_[i] = tau * a * d[i];
            slope_[i + 1] = tau * b * d[i];
        }
    }

    // tail model on the last decade: G r^{N+theta} = c0 + c1 r^{-theta} + c2 r^{-2 theta}
    if (theta < 2.0) {
        const double r_hi = radii[n - 1];
        const double r_lo = r_hi / 10.0;
        Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
        Eigen::Vector3d atb = Eigen::Vector3d::Zero();
        for (Eigen::Index i = 1; i < n; ++i) {
            const double r = radii[i];
            if (r < r_lo) continue;
            const double y = values[i] * std::pow(r, dim + theta);
            Eigen::Vector3d row(1.0, std::pow(r, -theta), std::pow(r, -2.0 * theta));
            ata += row * row.transpose();
            atb += row * y;
        }
        tail = ata.ldlt().solve(atb);
        if (!(tail[0] > 0.0))
            throw KernelBuildError("kernel profile: tail coefficient fit is non-positive");
    } else {
        tail.setZero();
    }

    const double mass = reconstructed_mass();
    mass_defect = std::abs(mass - 1.0);
    if (mass_defect > 1e-6)
        throw KernelBuildError("kernel profile: mass defect " + std::to_string(mass_defect) +
                               " exceeds 1e-6");

    bound_sup = 0.0;
    bound_inf = std::numeric_limits<double>::infinity();
    if (theta < 2.0) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double w = values[i] * std::pow(1.0 + radii[i], dim + theta);
            bound_sup = std::max(bound_sup, w);
            bound_inf = std::min(bound_inf, w);
        }
    }
}

double KernelProfile::value_at(double r) const {
    r = std::abs(r);
    if (theta == 2.0) return gaussian_kernel(r, dim);
    const Eigen::Index n = radii.size();
    const double r1 = radii[1];
    if (r < r1) {
        // even smooth kernel: quadratic in r^2 through (0, G0) and (r1, G1)
        const double g0 = values[0], g1 = values[1];
        const double q = r / r1;
        return g0 + (g1 - g0) * q * q;
    }
    const double r_max = radii[n - 1];
    if (r > r_max) {
        const double rt = std::pow(r, -theta);
        return std::pow(r, -double(dim) - theta) * (tail[0] + rt * (tail[1] + rt * tail[2]));
    }
    const double x = std::log(r);
    const Eigen::Index m = log_r_.size();
    Eigen::Index lo = std::upper_bound(log_r_.data(), log_r_.data() + m, x) - log_r_.data();
    lo = std::clamp<Eigen::Index>(lo - 1, 0, m - 2);
    const double h = log_r_[lo + 1] - log_r_[lo];
    const double s = (x - log_r_[lo]) / h;
    const double y0 = log_v_[lo], y1 = log_v_[lo + 1];
    const double m0 = slope_[lo] * h, m1 = slope_[lo + 1] * h;
    const double s2 = s * s, s3 = s2 * s;
    const double y = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 +
                     (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1;
    return std::exp(y);
}

double KernelProfile::reconstructed_mass() const {
    const double surface = (dim == 1) ? 2.0 : kTwoPi; // |S^{N-1}|
    const auto shell = [&](double r) { return value_at(r) * std::pow(r, dim - 1); };
    const quad::GaussRule& rule = quad::gauss_legendre(8);
    double acc = quad::panel(shell, 0.0, radii[1], rule);
    for (Eigen::Index i = 1; i + 1 < radii.size(); ++i)
        acc += quad::panel(shell, radii[i], radii[i + 1], rule);
    if (theta < 2.0) {
        // analytic tail of the three-term model
        const double rm = radii[radii.size() - 1];
        double tail_mass = 0.0;
        for (int k = 0; k < 3; ++k)
            tail_mass += tail[k] * std::pow(rm, -(k + 1) * theta) / ((k + 1) * theta);
        acc += tail_mass;
    } else {
        acc += quad::panel(shell, radii[radii.size() - 1], radii[radii.size() - 1] + 40.0, rule);
    }
    return surface * acc;
}

KernelProfile build_profile(double theta, int dim, const RadialGridSpec& spec) {
    if (!(theta > 0.0 && theta <= 2.0))
        throw std::invalid_argument("build_profile: need 0 < theta <= 2");
    if (dim != 1 && dim != 2)
        throw std::invalid_argument("build_profile: radial construction supports N = 1, 2");
    if (spec.samples < 16 || !(spec.r_min > 0.0) || !(spec.r_max > spec.r_min))
        throw std::invalid_argument("build_profile: malformed radial grid spec");

    KernelProfile prof;
    prof.theta = theta;
    prof.dim = dim;
    const int n = spec.samples;
    prof.radii.resize(n + 1);
    prof.values.resize(n + 1);
    prof.radii[0] = 0.0;
    // Gaussian decay underflows past r ~ 53; the theta = 2 table is only kept
    // for export (evaluation uses the closed form), so cap its range.
    const double r_max = theta == 2.0 ? std::min(spec.r_max, 36.0) : spec.r_max;
    const double log_lo = std::log(spec.r_min), log_hi = std::log(r_max);
    for (int i = 0; i < n; ++i)
        prof.radii[i + 1] = std::exp(log_lo + (log_hi - log_lo) * i / (n - 1));

    const auto fill = [&](auto&& f) {
        for (Eigen::Index i = 0; i < prof.radii.size(); ++i) prof.values[i] = f(prof.radii[i]);
    };
    if (theta == 2.0) {
        fill([&](double r) { return gaussian_kernel(r, dim); });
    } else if (theta == 1.0) {
        fill([&](double r) { return poisson_kernel(r, dim); });
    } else {
        fill([&](double r) { return fourier_inversion(r, theta, dim); });
        // self-check: rerun a few radii at doubled panel/term budgets
        const InversionBudget heavy{80, 1024, 96};
        double worst = 0.0;
        for (double r : {0.0, 0.37, 3.7, 37.0, spec.r_max}) {
            const double v = invert_symbol(r, theta, dim, 1.0, InversionBudget{});
            const double ref = invert_symbol(r, theta, dim, 1.0, heavy);
            worst = std::max(worst, std::abs(v - ref) / std::max(std::abs(ref), 1e-300));
        }
        prof.quad_error_estimate = worst;
        if (!(worst < 1e-8))
            throw KernelBuildError("build_profile: inversion quadrature self-check failed, "
                                   "relative discrepancy " +
                                   std::to_string(worst));
    }
    prof.finalize();
    return prof;
}

double eval_kernel(double radius, double t, const KernelProfile& profile) {
    if (!(t > 0.0)) throw std::invalid_argument("eval_kernel: need t > 0");
    const double s = std::pow(t, -1.0 / profile.theta);
    return std::pow(t, -double(profile.dim) / profile.theta) * profile.value_at(radius * s);
}

SemigroupIdentityReport check_semigroup_identity(const KernelProfile& profile, double s,
                                                 double t, const Grid& grid) {
    if (!(s > 0.0 && s < t))
        throw std::invalid_argument("check_semigroup_identity: need 0 < s < t");
    SemigroupIdentityReport rep;
    rep.s = s;
    rep.t = t;
    const Eigen::Index n = grid.node_count();
    Eigen::ArrayXd ga(n), gb(n), gt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = grid.radius(i);
        ga[i] = eval_kernel(r, s, profile);
        gb[i] = eval_kernel(r, t - s, profile);
        gt[i] = eval_kernel(r, t, profile);
    }
    SpectralWorkspace ws(grid, profile.theta);
    const Eigen::ArrayXd conv = ws.convolve(ga, gb);
    rep.max_abs_deviation = (conv - gt).abs().maxCoeff();
    rep.peak = gt.maxCoeff();
    return rep;
}

// ---------------------------------------------------------------------------
// text round trip

void export_profile(const KernelProfile& profile, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_profile: cannot open " + path);
    char buf[64];
    out << "format = fracheat-profile-1\n";
    out << "theta = ";
    std::snprintf(buf, sizeof buf, "%.17g\n", profile.theta);
    out << buf;
    out << "dim = " << profile.dim << "\n";
    out << "interp = monotone_cubic_loglog\n";
    for (int k = 0; k < 3; ++k) {
        std::snprintf(buf, sizeof buf, "tail_c%d = %.17g\n", k, profile.tail[k]);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "mass_defect = %.17g\n", profile.mass_defect);
    out << buf;
    std::snprintf(buf, sizeof buf, "quad_error = %.17g\n", profile.quad_error_estimate);
    out << buf;
    out << "samples = " << profile.radii.size() << "\n";
    out << "columns = r value\n";
    for (Eigen::Index i = 0; i < profile.radii.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", profile.radii[i], profile.values[i]);
        out << buf;
    }
    if (!out) throw std::runtime_error("export_profile: write failed for " + path);
}

KernelProfile import_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("import_profile: cannot open " + path);
    KernelProfile prof;
    std::string line;
    Eigen::Index samples = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key, eq;
        if (!(ls >> key)) continue;
        if (key == "columns") break;
        ls >> eq;
        if (key == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "fracheat-profile-1")
                throw std::runtime_error("import_profile: unknown format " + fmt);
        } else if (key == "theta")
            ls >> prof.theta;
        else if (key == "dim")
            ls >> prof.dim;
        else if (key == "tail_c0")
            ls >> prof.tail[0];
        else if (key == "tail_c1")
            ls >> prof.tail[1];
        else if (key == "tail_c2")
            ls >> prof.tail[2];
        else if (key == "mass_defect")
            ls >> prof.mass_defect;
        else if (key == "quad_error")
            ls >> prof.quad_error_estimate;
        else if (key == "samples")
            ls >> samples;
    }
    if (samples < 8) throw std::runtime_error("import_profile: missing or tiny sample table");
    prof.radii.resize(samples);
    prof.values.resize(samples);
    for (Eigen::Index i = 0; i < samples; ++i) {
        if (!(in >> prof.radii[i] >> prof.values[i]))
            throw std::runtime_error("import_profile: truncated sample table");
    }
    prof.finalize(); // re-certifies invariants on import
    return prof;
}

} // namespace fracheat
