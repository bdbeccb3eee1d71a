#pragma once

#include <stdexcept>
#include <string>

namespace fracheat {

// Criticality of the nonlinearity exponent p relative to p_c = 1 + theta/N.
enum class Regime { Subcritical, Critical, Supercritical };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Subcritical: return "subcritical";
        case Regime::Critical: return "critical";
        default: return "supercritical";
    }
}

// Problem triple (N, theta, p) for  d/dt u + (-Laplacian)^{theta/2} u = u^p.
struct ModelParams {
    int dim = 1;        // spatial dimension N >= 1 (desk scale: 1 or 2)
    double theta = 1.0; // operator order, 0 < theta <= 2
    double p = 2.0;     // nonlinearity exponent, p > 1

    double critical_p() const { return 1.0 + theta / static_cast<double>(dim); }

    Regime regime() const {
        const double pc = critical_p();
        if (p < pc) return Regime::Subcritical;
        if (p > pc) return Regime::Supercritical;
        return Regime::Critical;
    }

    // Exponent of the scale-invariant singular profile |x|^{-theta/(p-1)}.
    double singular_exponent() const { return theta / (p - 1.0); }

    void validate() const {
        if (dim < 1) throw std::invalid_argument("ModelParams.dim: need N >= 1");
        if (!(theta > 0.0 && theta <= 2.0))
            throw std::invalid_argument("ModelParams.theta: need 0 < theta <= 2");
        if (!(p > 1.0)) throw std::invalid_argument("ModelParams.p: need p > 1");
    }
};

} // namespace fracheat
