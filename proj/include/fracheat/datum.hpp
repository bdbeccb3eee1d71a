#pragma once

#include "fracheat/grid.hpp"
#include "fracheat/model.hpp"

#include <array>
#include <functional>
#include <optional>
#include <vector>

namespace fracheat {

enum class DatumFamily { Constant, PowerLaw, Singular, CriticalLog };

// Named closed-form radial profiles:
//   Constant:    c
//   PowerLaw(A): (1 + |x|)^{-A}
//   Singular:    gamma |x|^{-a}
//   CriticalLog: gamma |x|^{-N} [log(e + 1/|x|)]^{-N/theta - 1} + C
struct ClosedForm {
    DatumFamily family = DatumFamily::Constant;
    double decay = 0.0;    // A for PowerLaw
    double exponent = 0.0; // a for Singular
    double strength = 0.0; // gamma for Singular / CriticalLog
    double offset = 0.0;   // C for CriticalLog; the value for Constant

    bool singular_at_origin() const {
        return (family == DatumFamily::Singular && exponent > 0.0 && strength != 0.0) ||
               (family == DatumFamily::CriticalLog && strength != 0.0);
    }
};

double closed_form_value(const ClosedForm& cf, const ModelParams& params, double r);

struct Atom {
    std::array<double, 2> where{0.0, 0.0};
    double mass = 0.0;
};

// mu of the Cauchy problem: grid density + weighted atoms + closed form,
// all scaled by the multiplicative amplitude.
struct InitialDatum {
    std::optional<Field> density; // t = 0 samples; must live on the target grid
    std::vector<Atom> atoms;
    std::optional<ClosedForm> closed_form;
    double amplitude = 1.0;
    // Average the closed form over cells near the origin instead of point
    // sampling. Point samples on a grid much coarser than the datum's core
    // scale concentrate spurious mass in one node (an artificial atom whose
    // self-interaction shortens blow-up times); life-span sweeps with
    // auto-scaled boxes enable this.
    bool cell_average_core = false;

    void validate(const ModelParams& params) const;
};

InitialDatum constant_datum(double value);
InitialDatum closed_form_datum(const ClosedForm& cf, double amplitude = 1.0);
InitialDatum atom_datum(double x, double mass);

// Sample the datum on the grid. Closed forms are sampled pointwise except the
// cell containing the origin singularity, which gets its exact cell average
// (analytic in N = 1, radial quadrature in N = 2). Atoms are deposited as
// mass / h^N on their nearest node when include_atoms is set.
Field materialize(const InitialDatum& datum, const ModelParams& params, const Grid& grid,
                  bool include_atoms = true);

// Average over the h-cell around the origin of the closed form (amplitude 1).
double singular_cell_average(const ClosedForm& cf, const ModelParams& params, double h);

// Average over the h-cell around the origin of transform(closed form value).
// Exact for power / critical-log integrands via log-variable reduction when
// transform is the identity; otherwise adaptive log-panel quadrature with an
// asymptotic tail estimate. Throws if the cell integral diverges.
double singular_cell_average_transformed(const ClosedForm& cf, const ModelParams& params,
                                         double h,
                                         const std::function<double(double)>& transform);

} // namespace fracheat
