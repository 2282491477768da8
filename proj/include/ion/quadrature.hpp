#ifndef ION_QUADRATURE_HPP
#define ION_QUADRATURE_HPP

#include <functional>

#include "ion/types.hpp"

namespace ion {

struct QuadResult {
    Cplx value{0.0, 0.0};
    double abs_err = 0.0;
    long n_eval = 0;
};

struct QuadOptions {
    double abs_tol = 1e-11;
    double rel_tol = 1e-11;
    long max_eval = 200000;
};

using CplxFn = std::function<Cplx(double)>;

// Adaptive nested Gauss(7)/Kronrod(15) rule on [a, b].
QuadResult integrate_gk(const CplxFn& f, double a, double b,
                        const QuadOptions& opt = {});

// Non-adaptive 16-point Gauss-Legendre on [a, b]; no error estimate.
Cplx gauss16(const CplxFn& f, double a, double b);

// Semi-infinite integral of f over [a, inf), for integrands decaying at
// least exponentially with rate `decay` (used to size the geometric panels).
QuadResult integrate_to_inf(const CplxFn& f, double a, double decay,
                            const QuadOptions& opt = {});

} // namespace ion

#endif
