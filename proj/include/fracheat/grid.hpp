#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <complex>
#include <stdexcept>
#include <vector>

namespace fracheat {

// Periodic box [-L, L)^N sampled at M points per axis, h = 2L/M.
// Node coordinates are x_i = -L + i h; the origin is always a node.
struct Grid {
    int dim = 1;
    double half_width = 32.0;
    int points = 1024; // per axis, power of two

    double spacing() const { return 2.0 * half_width / points; }
    Eigen::Index node_count() const {
        return dim == 1 ? points : Eigen::Index(points) * points;
    }
    double cell_volume() const { return std::pow(spacing(), dim); }
    double coord(int i) const { return -half_width + i * spacing(); }

    // periodic representative in [-L, L)
    double wrap(double x) const {
        const double period = 2.0 * half_width;
        x = std::fmod(x + half_width, period);
        if (x < 0) x += period;
        return x - half_width;
    }

    // distance of flat node index k from the origin (periodic metric)
    double radius(Eigen::Index k) const {
        if (dim == 1) return std::abs(coord(static_cast<int>(k)));
        const double x = coord(static_cast<int>(k / points));
        const double y = coord(static_cast<int>(k % points));
        return std::hypot(x, y);
    }

    // nearest node to a point; throws if the point is outside the box
    Eigen::Index nearest_node(double x, double y = 0.0) const;

    bool operator==(const Grid&) const = default;

    void validate() const {
        if (dim != 1 && dim != 2) throw std::invalid_argument("Grid.dim: need N in {1, 2}");
        if (points < 8 || (points & (points - 1)) != 0)
            throw std::invalid_argument("Grid.points: need a power of two >= 8");
        if (!(half_width > 0.0)) throw std::invalid_argument("Grid.half_width: need L > 0");
    }
};

// Grid function at a time stamp; the numerical state u(.,t).
struct Field {
    Grid grid;
    double time = 0.0;
    Eigen::ArrayXd values; // flat, row-major for N = 2 (index = ix * M + iy)

    double sup_norm() const { return values.size() ? values.abs().maxCoeff() : 0.0; }
    double mass() const { return values.sum() * grid.cell_volume(); }
};

Field make_field(const Grid& grid, double time = 0.0, double fill = 0.0);

// FFT scratch bound to one grid and one operator order theta. Applies the
// periodic fractional heat multiplier exp(-t |xi|^theta) and FFT convolution.
// Not thread-safe; create one per worker. Everything it produces is a value.
class SpectralWorkspace {
public:
    SpectralWorkspace(const Grid& grid, double theta);

    const Grid& grid() const { return grid_; }
    double theta() const { return theta_; }

    // v <- exp(-t (-Laplacian)^{theta/2}) v. Negative undershoot (an artifact
    // of the spectral representation) is clamped to zero when clamp = true;
    // the pre-clamp minimum is written to *min_before_clamp when given.
    void apply_multiplier(Eigen::ArrayXd& v, double t, double* min_before_clamp = nullptr,
                          bool clamp = true) const;

    // Same evolution applied to a*f + b*g in one transform pair (a, b physical
    // fields, same layout). Used by the marching integrator.
    Eigen::ArrayXd evolve_combination(const Eigen::ArrayXd& f, double cf,
                                      const Eigen::ArrayXd& g, double cg, double t,
                                      double* min_before_clamp = nullptr,
                                      bool clamp = true) const;

    // Periodic convolution (f * g) h^N approximating the continuum convolution.
    Eigen::ArrayXd convolve(const Eigen::ArrayXd& f, const Eigen::ArrayXd& g) const;

private:
    Grid grid_;
    double theta_;
    Eigen::ArrayXd symbol_; // |xi|^theta per retained mode
    mutable Eigen::FFT<double> fft_;

    using Spectrum = Eigen::ArrayXcd;
    Spectrum forward(const Eigen::ArrayXd& v) const;
    Eigen::ArrayXd inverse(const Spectrum& s) const;
};

} // namespace fracheat
