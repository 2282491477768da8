#ifndef ION_SPECTRAL_HPP
#define ION_SPECTRAL_HPP

#include "ion/types.hpp"

namespace ion {

// A Laplace-variable point p = p1 + i n omega together with its derived
// branches. Branch conventions are fixed once, project-wide:
//   lambda = sqrt(-ip), principal root: closed fourth quadrant for Re p >= 0;
//   k      = sqrt(ip),  principal root: Im k > 0 for Re p > 0 and
//            arg k = pi/2 on p in i R+.
struct SpectralPoint {
    Cplx p{0.0, 0.0};
    Cplx p1{0.0, 0.0};
    int n = 0;
    Cplx lambda{0.0, 0.0};
    Cplx k{0.0, 0.0};
    Cplx nu{0.0, 0.0}; // b / (2k)
    Cplx Z{0.0, 0.0};  // exp(i pi b / (2 lambda))

    static SpectralPoint make(Cplx p1, int n, double omega, double b);
    // Re-derive lambda, k, nu, Z from p and b (consistency checks).
    static SpectralPoint from_p(Cplx p, double b);
};

Cplx branch_lambda(Cplx p);
Cplx branch_k(Cplx p);

} // namespace ion

#endif
