#ifndef ION_SERIES_HPP
#define ION_SERIES_HPP

#include <vector>

namespace ion {

// Truncated real power series c[0] + c[1] x + ... + c[n-1] x^{n-1}.
// All operations truncate to the shorter of the operands' lengths unless noted.
namespace series {

using S = std::vector<double>;

S mul(const S& a, const S& b, std::size_t n);
S add(const S& a, const S& b);
S scal(double c, const S& a);
// 1/a, requires a[0] != 0.
S recip(const S& a, std::size_t n);
// a(b(x)) requires b[0] == 0.
S compose(const S& a, const S& b, std::size_t n);
// Functional inverse of a with a[0] == 0, a[1] != 0.
S revert(const S& a, std::size_t n);
// Derivative and antiderivative (constant 0).
S diff(const S& a);
S integ(const S& a);
// a^p for real p, requires a[0] > 0.
S pow(const S& a, double p, std::size_t n);

double eval(const S& a, double x);

// Taylor coefficients of f at x0 from callable with analytic derivatives not
// available: central finite differences on a Chebyshev-like stencil is too
// noisy at high order, so instead we only provide this for callables that are
// cheap and smooth, via repeated Richardson differentiation of low order.
// Orders above ~6 should come from closed forms.

} // namespace series

} // namespace ion

#endif
