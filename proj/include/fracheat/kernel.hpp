#pragma once

#include "fracheat/model.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace fracheat {

struct Grid; // grid.hpp

// Numeric failure while constructing or certifying a kernel profile.
struct KernelBuildError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RadialGridSpec {
    double r_min = 1e-3;
    double r_max = 1e3;
    int samples = 4096; // log-spaced nodes; an r = 0 node is prepended
};

// Tabulated radial profile of G(.,1), the fundamental solution of
// d/dt u + (-Laplacian)^{theta/2} u = 0 at unit time. Evaluation at other
// times uses the exact self-similar scaling G(x,t) = t^{-N/theta} G(t^{-1/theta} x, 1).
//
// Immutable after construction; safe to share across threads.
struct KernelProfile {
    double theta = 0.0;
    int dim = 0;
    Eigen::ArrayXd radii;  // radii[0] = 0, then geometric from r_min to r_max
    Eigen::ArrayXd values; // G(r_i, 1), strictly positive, non-increasing
    // Far-field model G(r,1) ~ r^{-N-theta} (c0 + c1 r^{-theta} + c2 r^{-2theta}),
    // least-squares fitted on the last decade of samples. All-zero when theta = 2
    // (exact Gaussian is used everywhere instead of the table).
    Eigen::Vector3d tail = Eigen::Vector3d::Zero();
    int interp_order = 3; // monotone cubic in (log r, log G)

    // build diagnostics
    double mass_defect = 0.0;         // |reconstructed mass - 1|
    double quad_error_estimate = 0.0; // self-check of the inversion quadrature
    double bound_sup = 0.0;           // sup  G(r,1)(1+r)^{N+theta} over the table
    double bound_inf = 0.0;           // inf  G(r,1)(1+r)^{N+theta} over the table

    double tail_coeff() const { return tail[0]; }

    // G(r, 1) by table interpolation (exact Gaussian when theta = 2).
    double value_at(double r) const;

    // Integral of G(.,1) over R^N reconstructed from the table plus tail model.
    double reconstructed_mass() const;

private:
    friend KernelProfile build_profile(double, int, const RadialGridSpec&);
    friend KernelProfile import_profile(const std::string&);
    void finalize(); // interpolation slopes, tail fit, certification
    Eigen::ArrayXd log_r_, log_v_, slope_; // monotone-cubic data over the log-log table
};

// Tabulate G(.,1) and certify positivity, monotonicity, mass and the two-sided
// polynomial bound. theta = 2 and theta = 1 use their closed forms; other theta
// are computed by radial Fourier inversion of exp(-|xi|^theta).
KernelProfile build_profile(double theta, int dim, const RadialGridSpec& spec = {});

// G(|x|, t) for t > 0 via the scaling identity.
double eval_kernel(double radius, double t, const KernelProfile& profile);

template <class Derived>
double eval_kernel(const Eigen::MatrixBase<Derived>& x, double t, const KernelProfile& profile) {
    return eval_kernel(x.norm(), t, profile);
}

// Direct radial Fourier inversion of exp(-t |xi|^theta) at one radius
// (cosine transform for N = 1, order-zero Hankel transform for N = 2).
// Independent of any profile; used for construction and cross-checks.
double fourier_inversion(double r, double theta, int dim, double t = 1.0);

// Closed forms: Gauss-Weierstrass kernel (theta = 2) and Poisson kernel (theta = 1).
double gaussian_kernel(double r, int dim, double t = 1.0);
double poisson_kernel(double r, int dim, double t = 1.0);

// One-half stable subordinator density f_{t,1/2}(s) = t (4 pi)^{-1/2} s^{-3/2} exp(-t^2/(4s)).
// Only theta = 1 has this elementary form; other theta are rejected.
double subordinator_density(double s, double t, double theta = 1.0);

// G(r, t) for theta = 1 by numerically integrating the subordination formula
// against subordinator_density; oracle for the Poisson closed form.
double subordination_kernel(double r, double t, int dim);

struct SemigroupIdentityReport {
    double s = 0.0, t = 0.0;
    double max_abs_deviation = 0.0; // max |(G(.,s) * G(.,t-s))(x) - G(x,t)|
    double peak = 0.0;              // max G(x,t) on the grid, for scale
};

// Discrete check of G(.,t) = G(.,t-s) * G(.,s) (0 < s < t) by FFT convolution
// of sampled profiles on the given grid. Large deviation is a diagnostic, not
// an error.
SemigroupIdentityReport check_semigroup_identity(const KernelProfile& profile, double s,
                                                 double t, const Grid& grid);

// Self-describing text round trip so sweeps can reuse a certified profile.
void export_profile(const KernelProfile& profile, const std::string& path);
KernelProfile import_profile(const std::string& path);

} // namespace fracheat
