#pragma once

#include "fracheat/datum.hpp"
#include "fracheat/grid.hpp"
#include "fracheat/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fracheat {

// Psi_beta(s) = s [log(e + s)]^beta and its inverse (bracketed bisection).
double psi_beta(double s, double beta);
double psi_beta_inv(double y, double beta);
// rho(s) = s^{-N} [log(e + 1/s)]^{-N/theta}
double rho(double s, const ModelParams& params);

// Psi_{beta,L}(s) = s [log(L + s)]^beta used by the transformed supersolution;
// find_psi_L scans for the smallest L >= e making Psi positive convex with
// s^p / Psi and Psi / s monotone increasing.
double psi_beta_L(double s, double beta, double L);
double psi_beta_L_inv(double y, double beta, double L);
double find_psi_L(double beta, double p);

// sup over ball centers of mass/average functionals of the datum.
struct BallScan {
    Eigen::ArrayXd sigma;
    Eigen::ArrayXd sup_mass;    // sup_x int_{B(x,s)} mu^alpha dy  (mass units)
    Eigen::ArrayXd sup_average; // sup_x [avg_{B(x,s)} mu^alpha]^{1/alpha}
    double alpha = 1.0;
    std::vector<char> resolved;  // sigma >= 2h
    std::vector<char> truncated; // sigma > L/2
};

// Spectral convolution of mu^alpha with the sampled ball indicator, grid max,
// plus exact corrections for atoms (alpha = 1 only) and the singular cell.
BallScan ball_sup_scan(const InitialDatum& datum, const ModelParams& params, const Grid& grid,
                       const Eigen::ArrayXd& sigma, double alpha = 1.0,
                       const SpectralWorkspace* ws = nullptr);

// Same scan machinery for the log-refined functional of the critical regime:
// sup_average[i] = Psi_beta^{-1}[ sup_x avg_{B(x,s)} Psi_beta(scale * mu) ].
BallScan psi_ball_scan(const InitialDatum& datum, const ModelParams& params, const Grid& grid,
                       const Eigen::ArrayXd& sigma, double beta, double scale,
                       const SpectralWorkspace* ws = nullptr);

enum class CriterionId {
    Necessary1,    // p < p_c :  mu(B(x,T^{1/theta})) <= g T^{N/theta - 1/(p-1)}
    Necessary2,    // p = p_c :  mu(B(x,s)) <= g [log(e + T^{1/theta}/s)]^{-N/theta}
    Necessary3,    // p > p_c :  mu(B(x,s)) <= g s^{N - theta/(p-1)}
    Sufficient19,  // p < p_c single-radius ball mass bound
    Sufficient110, // alpha-mean bound, 1 < alpha < p
    Sufficient112, // critical Psi_beta bound against rho
};

const char* criterion_name(CriterionId id);

struct CriterionVerdict {
    CriterionId id;
    double measured_constant = 0.0; // smallest g making the inequality hold on the range
    double sigma_lo = 0.0, sigma_hi = 0.0;
    double pass_threshold = std::numeric_limits<double>::quiet_NaN();
    bool passed = false; // only meaningful when a pass_threshold was supplied
};

// Measures the best constant of the Theorem-type necessary condition matching
// the regime of params. A solver run reaching T makes this a lower-bound datum
// for the paper's constant; the verdict itself never claims nonexistence.
CriterionVerdict check_necessary(const BallScan& scan, const ModelParams& params, double T,
                                 double pass_threshold = std::numeric_limits<double>::quiet_NaN());

enum class SufficientVariant { BallMass19, AlphaMean110, PsiLog112 };

CriterionVerdict check_sufficient(const InitialDatum& datum, const ModelParams& params,
                                  const Grid& grid, double T, SufficientVariant variant,
                                  double alpha_or_beta, const Eigen::ArrayXd& sigma,
                                  double pass_threshold = std::numeric_limits<double>::quiet_NaN());

struct TracePairing {
    Eigen::ArrayXd times;
    Eigen::ArrayXd values;        // int u(.,t) eta dx
    double extrapolated = 0.0;    // quadratic Richardson value at t = 0
    double residual = 0.0;        // |quadratic - linear| extrapolation spread
};

// Weak-* pairing of the solution history against a test function and its
// extrapolation to t = 0 (the numerical initial trace).
TracePairing initial_trace_pairing(const std::vector<Field>& history, const Field& test_function);

// Reference pairing: int eta d mu on the grid (atoms paired exactly).
double datum_pairing(const InitialDatum& datum, const ModelParams& params,
                     const Field& test_function);

// Smooth compactly supported bump (1 - (r/R)^2)^3 sampled on the grid.
Field make_bump(const Grid& grid, double radius);

} // namespace fracheat
