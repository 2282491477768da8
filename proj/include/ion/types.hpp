#ifndef ION_TYPES_HPP
#define ION_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace ion {

using Cplx = std::complex<double>;

constexpr double PI = 3.14159265358979323846264338327950288;

inline constexpr Cplx I_UNIT{0.0, 1.0};

/// A complex function value together with an absolute error estimate.
struct ComplexEval {
    Cplx value{0.0, 0.0};
    double abs_err = 0.0;
};

// Error hierarchy. The CLI maps these onto exit codes.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration / precondition violation (exit code 2).
struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Numerical failure: non-convergence, pole hit, overflow (exit code 3).
struct NumericError : Error {
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Checkpoint/resume mismatch (exit code 4).
struct ResumeError : Error {
    explicit ResumeError(const std::string& msg) : Error(msg) {}
};

inline bool is_finite(Cplx z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline bool near_nonpositive_integer(Cplx z, double tol = 1e-12) {
    if (z.real() > 0.5) return false;
    double n = std::round(z.real());
    return n <= 0.0 && std::abs(z.real() - n) < tol && std::abs(z.imag()) < tol;
}

} // namespace ion

#endif
