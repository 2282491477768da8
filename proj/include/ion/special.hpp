#ifndef ION_SPECIAL_HPP
#define ION_SPECIAL_HPP

#include "ion/types.hpp"

namespace ion {

// --- Gamma -----------------------------------------------------------------

// Gamma(z) for complex z off the non-positive integers.
ComplexEval gamma_cpx(Cplx z);
// log Gamma(z), principal determination for Re z > 0, reflected otherwise.
Cplx log_gamma(Cplx z);

// --- Confluent hypergeometric ----------------------------------------------

// Kummer M(a, b, z). Taylor series with compensated summation; asymptotic
// expansion once |z| > 40.
ComplexEval kummer_m(Cplx a, Cplx b, Cplx z);
// dM/dz = (a/b) M(a+1, b+1, z).
ComplexEval kummer_m_prime(Cplx a, Cplx b, Cplx z);

// Kummer U(a, b, z), recessive at large |z|; arg z in (-pi, pi], z != 0.
// Evaluated from the Laplace integral along a rotated ray (needs Re a > 0)
// or from the loop-contour representation otherwise.
ComplexEval kummer_u(Cplx a, Cplx b, Cplx z);
ComplexEval kummer_u_prime(Cplx a, Cplx b, Cplx z);

enum class WhittakerKind { M, W };

// Whittaker functions via Eq.-(201)-style reduction to Kummer M/U.
ComplexEval whittaker_mw(WhittakerKind kind, Cplx kappa, Cplx mu, Cplx z);
// d/dz of the same.
ComplexEval whittaker_mw_prime(WhittakerKind kind, Cplx kappa, Cplx mu, Cplx z);

// --- Bessel family at half-integer order ------------------------------------

enum class BesselKind { J, Y, I, K };

// Cylinder function of order l + 1/2 at complex argument, from the exact
// spherical closed forms (finite sums of exponentials / power series).
ComplexEval bessel_halfint(BesselKind kind, int l, Cplx zeta);

// Spherical variants (j_l, y_l, i_l, k_l); these underlie bessel_halfint and
// are occasionally more convenient.
Cplx sph_j(int l, Cplx z);
Cplx sph_y(int l, Cplx z);
Cplx sph_i(int l, Cplx z);
Cplx sph_k(int l, Cplx z);

// Integer-order J_n, Y_n for real positive argument (wraps the stdlib).
double bessel_jn(int n, double x);
double bessel_yn(int n, double x);

// --- Auxiliary integral -----------------------------------------------------

// G_{2l+1}(nu) = (2/pi) Int_0^inf sinh((2l+1)t) exp(-nu sinh t) dt, nu > 0.
ComplexEval g_aux(int l, double nu);

} // namespace ion

#endif
