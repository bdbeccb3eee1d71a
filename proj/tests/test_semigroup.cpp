#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracheat/kernel.hpp"
#include "fracheat/quadrature.hpp"
#include "fracheat/semigroup.hpp"

#include <cmath>

using namespace fracheat;

namespace {

Grid small_grid(int points = 1024, double half_width = 32.0) {
    Grid g;
    g.dim = 1;
    g.points = points;
    g.half_width = half_width;
    return g;
}

// deterministic "arbitrary" smooth positive field
Field smooth_field(const Grid& grid) {
    Field f = make_field(grid);
    for (int i = 0; i < grid.points; ++i) {
        const double x = grid.coord(i) * M_PI / grid.half_width;
        f.values[i] = 2.0 + std::sin(x) + 0.37 * std::cos(3.0 * x) + 0.11 * std::sin(7.0 * x + 0.5);
    }
    return f;
}

} // namespace

TEST_CASE("materialize: constant, singular cell, atoms") {
    const ModelParams mp{1, 1.0, 2.0};
    const Grid grid = small_grid(256, 12.8); // h = 0.1

    const Field c = materialize(constant_datum(3.5), mp, grid);
    CHECK((c.values == 3.5).all());

    // singular cell average of |x|^{-1/2}: (2/h) * (h/2)^{1/2} / (1/2)
    ClosedForm sing{DatumFamily::Singular, 0.0, 0.5, 1.0, 0.0};
    const Field s = materialize(closed_form_datum(sing), mp, grid);
    const double h = grid.spacing();
    const double exact = (2.0 / h) * std::pow(0.5 * h, 0.5) / 0.5;
    const Eigen::Index origin = grid.nearest_node(0.0);
    CHECK(s.values[origin] == doctest::Approx(exact).epsilon(1e-12));
    // the neighbor is a plain sample
    CHECK(s.values[origin + 1] == doctest::Approx(std::pow(h, -0.5)).epsilon(1e-12));

    const Field a = materialize(atom_datum(0.0, 1.0), mp, grid);
    CHECK(a.values[origin] == doctest::Approx(1.0 / h).epsilon(1e-14));
    CHECK(a.mass() == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(materialize(atom_datum(100.0, 1.0), mp, grid), std::invalid_argument);
    ClosedForm bad{DatumFamily::Singular, 0.0, 1.2, 1.0, 0.0};
    CHECK_THROWS_AS(materialize(closed_form_datum(bad), mp, grid), std::invalid_argument);
}

TEST_CASE("critical-log singular cell against a brute-force oracle") {
    const ModelParams mp{1, 1.0, 2.0};
    const double h = 0.05;
    ClosedForm cf{DatumFamily::CriticalLog, 0.0, 0.0, 1.0, 0.3};
    const double got = singular_cell_average(cf, mp, h);
    // oracle: substitute w = log(e + 1/r); dr/r = -e^w/(e^w - e) dw
    const double beta_c = 2.0; // N/theta + 1
    const double R = 0.5 * h;
    const double wR = std::log(M_E + 1.0 / R);
    const auto integrand = [&](double w) {
        return std::pow(w, -beta_c) * std::exp(w) / (std::exp(w) - M_E);
    };
    double brute = 0.0;
    double lo = wR, len = 0.25;
    while (lo < 500.0) {
        const double hi = std::min(lo + len, 500.0);
        brute += quad::panel(integrand, lo, hi, quad::gauss_legendre(16));
        lo = hi;
        len *= 1.2;
    }
    brute += std::pow(500.0, 1.0 - beta_c) / (beta_c - 1.0); // pure-power tail
    const double oracle = (2.0 / h) * brute + 0.3;
    CHECK(got == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("apply_semigroup basics") {
    const ModelParams mp{1, 1.0, 2.0};
    const Grid grid = small_grid();
    SpectralWorkspace ws(grid, mp.theta);

    const Field f = smooth_field(grid);
    const Field same = apply_semigroup(f, 0.0, ws);
    CHECK((same.values - f.values).abs().maxCoeff() == 0.0); // exact identity

    const Field c0 = materialize(constant_datum(2.5), mp, grid);
    const Field c1 = apply_semigroup(c0, 0.7, ws);
    CHECK((c1.values - 2.5).abs().maxCoeff() < 1e-12);

    // mass conservation: the zero mode is invariant
    const Field g = apply_semigroup(f, 0.37, ws);
    CHECK(std::abs(g.mass() - f.mass()) < 1e-12 * std::abs(f.mass()));
}

TEST_CASE("semigroup law in multiplier form") {
    const Grid grid = small_grid();
    const Field f = smooth_field(grid);
    for (double theta : {0.5, 1.0, 1.5, 2.0}) {
        SpectralWorkspace ws(grid, theta);
        for (double s : {0.25, 1.0}) {
            for (double t : {0.5, 2.0}) {
                const Field two = apply_semigroup(apply_semigroup(f, s, ws), t, ws);
                const Field one = apply_semigroup(f, s + t, ws);
                CHECK((two.values - one.values).abs().maxCoeff() <
                      1e-12 * f.values.abs().maxCoeff());
            }
        }
    }
}

TEST_CASE("atom evolves to the Poisson profile") {
    const ModelParams mp{1, 1.0, 2.0};
    Grid grid;
    grid.dim = 1;
    grid.points = 4096;
    grid.half_width = 64.0;
    SpectralWorkspace ws(grid, 1.0);

    double undershoot = 0.0;
    const Field u = apply_semigroup(atom_datum(0.0, 1.0), mp, 1.0, ws, &undershoot);
    const KernelProfile prof = build_profile(1.0, 1);
    double worst = 0.0;
    for (int i = 0; i < grid.points; ++i) {
        const double x = grid.coord(i);
        if (std::abs(x) > 16.0) continue; // away from box edges
        worst = std::max(worst, std::abs(u.values[i] - eval_kernel(x, 1.0, prof)));
    }
    CHECK(worst < 1e-4);
    CHECK(undershoot < 1e-8 * u.sup_norm() + 1e-12);
}

TEST_CASE("positivity clamp diagnostic stays small") {
    const ModelParams mp{1, 1.5, 2.0};
    const Grid grid = small_grid(2048, 32.0);
    SpectralWorkspace ws(grid, mp.theta);
    ClosedForm pl{DatumFamily::PowerLaw, 2.0, 0.0, 0.0, 0.0};
    double undershoot = 0.0;
    const Field u = apply_semigroup(closed_form_datum(pl), mp, 0.01, ws, &undershoot);
    CHECK((u.values >= 0.0).all());
    CHECK(undershoot <= 1e-8 * u.sup_norm());
}

TEST_CASE("smoothing ratio") {
    const ModelParams mp{1, 1.0, 2.0};
    Grid grid;
    grid.dim = 1;
    grid.points = 4096;
    grid.half_width = 64.0;
    SpectralWorkspace ws(grid, mp.theta);

    // unit atom: ratio approximates G(0,1) = 1/pi
    const auto atom = smoothing_ratio(atom_datum(0.0, 1.0), mp, grid, 0.5, ws);
    CHECK(atom.ball_sup == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(atom.normalized_ratio == doctest::Approx(1.0 / M_PI).epsilon(0.02));

    // constant datum: ratio is t-independent (= 1/2 with the discrete ball volume)
    const InitialDatum cd = constant_datum(1.7);
    const auto c1 = smoothing_ratio(cd, mp, grid, 0.25, ws);
    const auto c2 = smoothing_ratio(cd, mp, grid, 1.0, ws);
    CHECK(c1.normalized_ratio == doctest::Approx(0.5).epsilon(0.05));
    CHECK(c1.normalized_ratio == doctest::Approx(c2.normalized_ratio).epsilon(0.05));

    // PowerLaw(A=2) over dyadic t: uniform boundedness, spread <= 4
    ClosedForm pl{DatumFamily::PowerLaw, 2.0, 0.0, 0.0, 0.0};
    const InitialDatum datum = closed_form_datum(pl);
    double lo = 1e300, hi = 0.0;
    for (int k = -6; k <= 0; ++k) {
        const auto rep = smoothing_ratio(datum, mp, grid, std::pow(2.0, k), ws);
        CHECK(!rep.ball_truncated);
        lo = std::min(lo, rep.normalized_ratio);
        hi = std::max(hi, rep.normalized_ratio);
    }
    CHECK(hi / lo <= 4.0);
}

TEST_CASE("two-dimensional round trip and evolution") {
    ModelParams mp{2, 1.0, 2.0};
    Grid grid;
    grid.dim = 2;
    grid.points = 64;
    grid.half_width = 16.0;
    SpectralWorkspace ws(grid, mp.theta);

    const Field c = materialize(constant_datum(1.25), mp, grid);
    const Field ct = apply_semigroup(c, 0.5, ws);
    CHECK((ct.values - 1.25).abs().maxCoeff() < 1e-12);

    Field f = make_field(grid);
    for (Eigen::Index i = 0; i < grid.node_count(); ++i)
        f.values[i] = 1.0 + std::exp(-0.25 * grid.radius(i) * grid.radius(i));
    const Field two = apply_semigroup(apply_semigroup(f, 0.3, ws), 0.7, ws);
    const Field one = apply_semigroup(f, 1.0, ws);
    CHECK((two.values - one.values).abs().maxCoeff() < 1e-12 * f.sup_norm());
    CHECK(std::abs(one.mass() - f.mass()) < 1e-12 * f.mass());
}
