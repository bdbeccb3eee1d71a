#include "fracheat/grid.hpp"

#include <cmath>

namespace fracheat {

Eigen::Index Grid::nearest_node(double x, double y) const {
    const double h = spacing();
    const auto index_of = [&](double c) -> Eigen::Index {
        if (c < -half_width - 0.5 * h || c >= half_width + 0.5 * h)
            throw std::invalid_argument("Grid::nearest_node: point outside the box");
        Eigen::Index i = static_cast<Eigen::Index>(std::llround((c + half_width) / h));
        return (i % points + points) % points;
    };
    if (dim == 1) return index_of(x);
    return index_of(x) * points + index_of(y);
}

Field make_field(const Grid& grid, double time, double fill) {
    Field f;
    f.grid = grid;
    f.time = time;
    f.values = Eigen::ArrayXd::Constant(grid.node_count(), fill);
    return f;
}

SpectralWorkspace::SpectralWorkspace(const Grid& grid, double theta)
    : grid_(grid), theta_(theta) {
    grid_.validate();
    if (!(theta > 0.0 && theta <= 2.0))
        throw std::invalid_argument("SpectralWorkspace: need 0 < theta <= 2");
    const int m = grid_.points;
    const double fund = M_PI / grid_.half_width; // period 2L
    if (grid_.dim == 1) {
        symbol_.resize(m / 2 + 1);
        for (int k = 0; k <= m / 2; ++k) symbol_[k] = std::pow(fund * k, theta);
    } else {
        symbol_.resize(Eigen::Index(m) * m);
        for (int kx = 0; kx < m; ++kx) {
            const int sx = kx <= m / 2 ? kx : kx - m;
            for (int ky = 0; ky < m; ++ky) {
                const int sy = ky <= m / 2 ? ky : ky - m;
                const double k2 = double(sx) * sx + double(sy) * sy;
                symbol_[Eigen::Index(kx) * m + ky] = std::pow(fund * std::sqrt(k2), theta);
            }
        }
    }
    fft_.SetFlag(Eigen::FFT<double>::HalfSpectrum);
}

SpectralWorkspace::Spectrum SpectralWorkspace::forward(const Eigen::ArrayXd& v) const {
    const int m = grid_.points;
    if (grid_.dim == 1) {
        Eigen::VectorXcd out;
        Eigen::VectorXd in = v.matrix();
        fft_.fwd(out, in);
        return out.array();
    }
    // rows then columns, full complex spectrum
    Eigen::ArrayXcd spec(Eigen::Index(m) * m);
    Eigen::VectorXcd tmp_in(m), tmp_out(m);
    for (int ix = 0; ix < m; ++ix) {
        for (int iy = 0; iy < m; ++iy) tmp_in[iy] = v[Eigen::Index(ix) * m + iy];
        fft_.fwd(tmp_out, tmp_in);
        for (int iy = 0; iy < m; ++iy) spec[Eigen::Index(ix) * m + iy] = tmp_out[iy];
    }
    for (int iy = 0; iy < m; ++iy) {
        for (int ix = 0; ix < m; ++ix) tmp_in[ix] = spec[Eigen::Index(ix) * m + iy];
        fft_.fwd(tmp_out, tmp_in);
        for (int ix = 0; ix < m; ++ix) spec[Eigen::Index(ix) * m + iy] = tmp_out[ix];
    }
    return spec;
}

Eigen::ArrayXd SpectralWorkspace::inverse(const Spectrum& s) const {
    const int m = grid_.points;
    if (grid_.dim == 1) {
        Eigen::VectorXd out;
        Eigen::VectorXcd in = s.matrix();
        fft_.inv(out, in, m);
        return out.array();
    }
    Eigen::ArrayXcd work = s;
    Eigen::VectorXcd tmp_in(m), tmp_out(m);
    for (int iy = 0; iy < m; ++iy) {
        for (int ix = 0; ix < m; ++ix) tmp_in[ix] = work[Eigen::Index(ix) * m + iy];
        fft_.inv(tmp_out, tmp_in);
        for (int ix = 0; ix < m; ++ix) work[Eigen::Index(ix) * m + iy] = tmp_out[ix];
    }
    Eigen::ArrayXd out(Eigen::Index(m) * m);
    for (int ix = 0; ix < m; ++ix) {
        for (int iy = 0; iy < m; ++iy) tmp_in[iy] = work[Eigen::Index(ix) * m + iy];
        fft_.inv(tmp_out, tmp_in);
        for (int iy = 0; iy < m; ++iy) out[Eigen::Index(ix) * m + iy] = tmp_out[iy].real();
    }
    return out;
}

void SpectralWorkspace::apply_multiplier(Eigen::ArrayXd& v, double t, double* min_before_clamp,
                                         bool clamp) const {
    if (t == 0.0) { // exact identity
        if (min_before_clamp) *min_before_clamp = v.size() ? v.minCoeff() : 0.0;
        return;
    }
    if (!(t > 0.0)) throw std::invalid_argument("apply_multiplier: need t >= 0");
    Spectrum s = forward(v);
    s *= (-t * symbol_).exp();
    v = inverse(s);
    const double mn = v.size() ? v.minCoeff() : 0.0;
    if (min_before_clamp) *min_before_clamp = mn;
    if (clamp && mn < 0.0) v = v.max(0.0);
}

Eigen::ArrayXd SpectralWorkspace::evolve_combination(const Eigen::ArrayXd& f, double cf,
                                                     const Eigen::ArrayXd& g, double cg,
                                                     double t, double* min_before_clamp,
                                                     bool clamp) const {
    Eigen::ArrayXd combo = cf * f + cg * g;
    apply_multiplier(combo, t, min_before_clamp, clamp);
    return combo;
}

Eigen::ArrayXd SpectralWorkspace::convolve(const Eigen::ArrayXd& f,
                                           const Eigen::ArrayXd& g) const {
    Spectrum a = forward(f);
    const Spectrum b = forward(g);
    a *= b;
    const Eigen::ArrayXd raw = inverse(a) * grid_.cell_volume();
    // samples are indexed from x = -L while the convolution theorem treats
    // index 0 as the origin: rotate by M/2 per axis
    const int m = grid_.points;
    Eigen::ArrayXd out(raw.size());
    if (grid_.dim == 1) {
        for (int i = 0; i < m; ++i) out[i] = raw[(i + m / 2) % m];
    } else {
        for (int ix = 0; ix < m; ++ix)
            for (int iy = 0; iy < m; ++iy)
                out[Eigen::Index(ix) * m + iy] =
                    raw[Eigen::Index((ix + m / 2) % m) * m + (iy + m / 2) % m];
    }
    return out;
}

} // namespace fracheat
