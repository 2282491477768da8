#ifndef ION_SPHASE_HPP
#define ION_SPHASE_HPP

#include <functional>
#include <vector>

#include "ion/types.hpp"

namespace ion {

// Oscillatory integral Int_0^a s^{l/2} e^{i(t s + d_j / sqrt(s))} ds and its
// saddle-point approximation; d_j = j pi b / 2.
struct OscIntSpec {
    int l = 0;
    double d = 0.0; // d_j
    double a = 1.0; // upper endpoint
    double t = 1.0;
};

struct SaddleData {
    double s0 = 0.0;  // (d/(2t))^{2/3}
    double nu = 0.0;  // 2^{-2/3} d^{2/3} t^{1/3}
};
SaddleData saddle(double d, double t);

// Phase-tracking panel quadrature of the oscillatory integral (the oracle).
// panel_scale < 1 refines all panels, for convergence checks.
ComplexEval osc_quadrature(const OscIntSpec& spec, double panel_scale = 1.0);

// Integral over the negative side [-a, 0] (exponentially damped integrand
// continued through s = e^{i pi}|s|); bounded by O(1/t).
ComplexEval osc_negative_side(const OscIntSpec& spec);

// Leading stationary-phase value: the phase at the saddle is 3 nu and the
// curvature factor gives sqrt(4 pi / (3 nu)), so
//   I ~ s0^{1 + l/2} sqrt(4 pi/(3 nu)) e^{i (3 nu + pi/4)},
// with error O(s0^{1+l/2} / nu). Warns (via flag) below nu = 5.
struct SaddleApprox {
    Cplx value{0.0, 0.0};
    double error_bound = 0.0;
    bool low_nu_warning = false;
};
SaddleApprox osc_saddle_approx(const OscIntSpec& spec);

// Coefficient model |D_j| <= C e^{-c j}.
struct CoeffModel {
    std::vector<Cplx> D; // D_j, j = 1, 2, ...
    double decay_C = 1.0, decay_c = 1.0;

    static CoeffModel geometric(double c, int jmax); // D_j = e^{-c j}
};

// sum_j D_j s0_j sqrt(4 pi/3) e^{i(3 nu_j + pi/4)} / sqrt(nu_j) over the
// model, truncated where terms fall below 1e-16 of the partial sum.
struct DecaySeriesPoint {
    double t = 0.0;
    double amplitude = 0.0; // |sum|
};
std::vector<DecaySeriesPoint> decay_series(double b, const CoeffModel& model,
                                           const std::vector<double>& t_grid);

// Least-squares fit of D_j (j = 0..J) from samples v_m ~ sum_j D_j
// exp(i j pi b / (2 sqrt(s_m))): the Z-power expansion on a small-s grid.
std::vector<Cplx> fit_coefficients(const std::vector<double>& s_samples,
                                   const std::vector<Cplx>& values, double b,
                                   int J);

// Phase grid for well-conditioned coefficient fits: s_m such that
// pi b/(2 sqrt(s_m)) is uniform over `cycles` periods starting at phi0.
std::vector<double> coefficient_s_grid(double b, double phi0, double cycles,
                                       int count);

} // namespace ion

#endif
