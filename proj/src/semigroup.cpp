#include "fracheat/semigroup.hpp"

#include "fracheat/criteria.hpp"

#include <cmath>

namespace fracheat {

Field apply_semigroup(const Field& f, double t, const SpectralWorkspace& ws, double* undershoot) {
    if (!(f.grid == ws.grid()))
        throw std::invalid_argument("apply_semigroup: field grid does not match workspace");
    Field out = f;
    if (t == 0.0) {
        if (undershoot) *undershoot = 0.0;
        return out;
    }
    double pre_min = 0.0;
    ws.apply_multiplier(out.values, t, &pre_min);
    if (undershoot) *undershoot = std::max(0.0, -pre_min);
    out.time = f.time + t;
    return out;
}

Field apply_semigroup(const InitialDatum& datum, const ModelParams& params, double t,
                      const SpectralWorkspace& ws, double* undershoot) {
    Field f = materialize(datum, params, ws.grid());
    return apply_semigroup(f, t, ws, undershoot);
}

SmoothingReport smoothing_ratio(const InitialDatum& datum, const ModelParams& params,
                                const Grid& grid, double t, const SpectralWorkspace& ws) {
    if (!(t > 0.0)) throw std::invalid_argument("smoothing_ratio: need t > 0");
    SmoothingReport rep;
    rep.t = t;
    rep.sup_norm = apply_semigroup(datum, params, t, ws).sup_norm();

    const double radius = std::pow(t, 1.0 / params.theta);
    Eigen::ArrayXd sigma(1);
    sigma[0] = radius;
    const BallScan scan = ball_sup_scan(datum, params, grid, sigma, 1.0, &ws);
    rep.ball_sup = scan.sup_mass[0];
    rep.ball_truncated = scan.truncated[0] != 0;
    const double smoothing_scale = std::pow(t, -double(params.dim) / params.theta);
    rep.normalized_ratio = rep.sup_norm / (smoothing_scale * rep.ball_sup);
    return rep;
}

} // namespace fracheat
