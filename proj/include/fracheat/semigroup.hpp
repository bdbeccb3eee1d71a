#pragma once

#include "fracheat/datum.hpp"
#include "fracheat/grid.hpp"
#include "fracheat/model.hpp"

namespace fracheat {

// S(t) f by the spectral multiplier exp(-t |xi|^theta). t = 0 is the exact
// identity; the zero mode is untouched, so the discrete mass is conserved.
// Negative spectral undershoot is clamped; its magnitude lands in *undershoot
// (as a nonnegative number) when requested.
Field apply_semigroup(const Field& f, double t, const SpectralWorkspace& ws,
                      double* undershoot = nullptr);

// S(t) mu for a measure datum: materializes on the grid, then applies the
// multiplier (atoms become nearest-node spikes that S(t) immediately mollifies).
Field apply_semigroup(const InitialDatum& datum, const ModelParams& params, double t,
                      const SpectralWorkspace& ws, double* undershoot = nullptr);

struct SmoothingReport {
    double t = 0.0;
    double sup_norm = 0.0;         // ||S(t) mu||_inf on the grid
    double ball_sup = 0.0;         // sup_x mu(B(x, t^{1/theta}))
    double normalized_ratio = 0.0; // sup_norm / (t^{-N/theta} ball_sup)
    bool ball_truncated = false;   // t^{1/theta} > L/2
};

// Measures the smoothing inequality ||S(t)mu||_inf <= C t^{-N/theta} sup_x mu(B(x,t^{1/theta})):
// the normalized ratio is the running estimate of C and must stay bounded over a t-sweep.
SmoothingReport smoothing_ratio(const InitialDatum& datum, const ModelParams& params,
                                const Grid& grid, double t, const SpectralWorkspace& ws);

} // namespace fracheat
