#include "ion/spectral.hpp"

#include <cmath>

namespace ion {

Cplx branch_lambda(Cplx p) {
    Cplx w = -I_UNIT * p;
    Cplx l = std::sqrt(w);
    // On the cut (-ip real negative, i.e. p on iR-) take the limit from
    // Re p > 0: lambda = -i sqrt(|w|), the closed-fourth-quadrant branch.
    if (w.real() < 0.0 && w.imag() == 0.0 && l.imag() > 0.0) l = -l;
    return l;
}

Cplx branch_k(Cplx p) {
    Cplx w = I_UNIT * p;
    Cplx k = std::sqrt(w);
    // arg k = pi/2 on p in iR+ (w real negative), regardless of the sign of
    // the zero imaginary part.
    if (w.real() < 0.0 && w.imag() == 0.0 && k.imag() < 0.0) k = -k;
    return k;
}

SpectralPoint SpectralPoint::from_p(Cplx p, double b) {
    SpectralPoint s;
    s.p = p;
    s.p1 = p;
    s.n = 0;
    s.lambda = branch_lambda(p);
    s.k = branch_k(p);
    s.nu = (s.k != Cplx{0.0, 0.0}) ? Cplx{0.5 * b, 0.0} / s.k : Cplx{0.0, 0.0};
    s.Z = (s.lambda != Cplx{0.0, 0.0})
              ? std::exp(I_UNIT * PI * Cplx{0.5 * b, 0.0} / s.lambda)
              : Cplx{0.0, 0.0};
    return s;
}

SpectralPoint SpectralPoint::make(Cplx p1, int n, double omega, double b) {
    SpectralPoint s = from_p(p1 + I_UNIT * (double(n) * omega), b);
    s.p1 = p1;
    s.n = n;
    return s;
}

} // namespace ion
