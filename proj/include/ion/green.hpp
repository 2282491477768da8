#ifndef ION_GREEN_HPP
#define ION_GREEN_HPP

#include <array>
#include <vector>

#include "ion/config.hpp"
#include "ion/grid.hpp"
#include "ion/spectral.hpp"
#include "ion/types.hpp"

namespace ion {

using Vec3 = std::array<double, 3>;

// Prolate-spheroidal pair xi = |x| + |x'| + |x - x'|, eta = |x| + |x'| - |x - x'|.
struct ProlatePair {
    double xi = 0.0;
    double eta = 0.0;
};

ProlatePair prolate_coords(const Vec3& x, const Vec3& xp);

// The four Laplace-type integrals entering the closed-form Green's function:
//   I(z)    = Int_0^{i inf} e^{-z t} t^{-i nu} (1+t)^{ i nu} dt
//   Idot    = dI/dz,
//   J(z)    = Int_0^1      e^{ z t} t^{-i nu} (1-t)^{ i nu} dt
//   Jdot    = dJ/dz.
// The I-ray is rotated to the direction of fastest decay (the +inf ray when
// p lies on iR+). For |Im nu| >= 1 the J integrals switch to a stadium
// contour encircling [0,1].
struct ContourIJ {
    ComplexEval I, Idot, J, Jdot;
};

ContourIJ contour_IJ(Cplx z, Cplx nu);

// Full-space Coulomb Green's function G(x, x'; k) with coupling b.
ComplexEval green_full(const Vec3& x, const Vec3& xp, Cplx k, double b);

// --- Small-lambda contour machinery (w2 asymptotics) -------------------------

// Steepest-descent evaluation of
//   M_i(zeta, eps2) = (1/(pi i)) Int_{C_i} e^{-zeta P(tau; eps2)} tau^{l+mi} (tau+eps2)^l dtau
// with P(tau; eps2) = -log(1 + eps2/tau)/eps2 + tau, through the saddle near
// +i (i = 1, 3) or -i (i = 2, 4); mi = 0 for M1/M2 and 1 for M3/M4.
ComplexEval m_contour(int which, double zeta, Cplx eps2, int l);

// Saddle of P in the upper half plane as a function of eps2.
Cplx m_contour_saddle_upper(Cplx eps2);

// M_i with the direct descent path for eps2 near the positive real axis and
// Taylor continuation in eps2 (analyticity per the saddle construction) for
// other directions, where the descent geometry degenerates.
ComplexEval m_contour_cont(int which, double zeta, Cplx eps2, int l);

// w2'(a)/w2(a) from the M1..M4 functions (small-lambda route), with Z free:
//   -lambda + l/a - sqrt(b/a) (Z^2 M3 + M4) / (Z^2 M1 + M2).
ComplexEval w2_ratio(Cplx lambda, Cplx Z, double a, double b, int l);

// Loop-contour H(z; kappa, l, moment) = Int_C e^{-zt} t^{l-kappa+moment} (1+t)^{l+kappa} dt
// (moment 0 or 1); C from +inf around 0 counterclockwise right of t = -1.
ComplexEval loop_H(Cplx z, Cplx kappa, int l, int moment);

// Exterior logarithmic derivative w2'(a)/w2(a) at the physical Z(lambda),
// choosing between the direct Kummer-U route, the loop contour and the
// steepest-descent form depending on where (lambda, kappa) falls.
Cplx exterior_logderiv(Cplx lambda, double a, double b, int l);

// --- Whittaker-assembled radial resolvent (Eqs. 52-56 route) -----------------

struct RadialResolventResult {
    std::vector<Cplx> f;   // solution on the grid nodes, R-representation
    std::vector<Cplx> fp;  // derivative f'
    Cplx A{0.0, 0.0};      // interior Whittaker-M coefficient
    Cplx B{0.0, 0.0};      // exterior w2 coefficient
};

// Solve (-d2/dr2 - (2/r) d/dr + l(l+1)/r^2 - b/r + lambda^2 - i c beta_on) f = g
// on [0, a] with regularity at 0 and w2-decay beyond a, assembled from
// Whittaker solutions and C1-matched at r = a.
RadialResolventResult radial_resolvent(const std::vector<Cplx>& g,
                                       const RadialGrid& grid, int l,
                                       const SpectralPoint& sp,
                                       const RegularizationParams& rp,
                                       double b, bool beta_on);

// The matching coefficient A = (f0 w2' - f0' w2) / (m1' w2 - m1 w2') at r = a.
struct CoeffAInput {
    Cplx f0, f0p;   // particular solution and derivative at r = a
    Cplx m1, m1p;   // interior Whittaker M solution at r = a
    Cplx w2_ld;     // exterior logarithmic derivative w2'(a)/w2(a)
};
ComplexEval coeff_A(const CoeffAInput& in);

// Scaled denominator of A over the extended parameters (lambda, Z), for the
// non-degeneracy scan: m1'/m1 and the stripped w2 built from M1..M4.
ComplexEval coeff_A_denominator(Cplx lambda, Cplx Z, double a, double b,
                                double c, int l);

} // namespace ion

#endif
