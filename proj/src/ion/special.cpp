#include "ion/special.hpp"

#include <cmath>
#include <vector>

#include "ion/quadrature.hpp"

namespace ion {

namespace {

// log(sin(pi z)) stable for large |Im z| (avoids overflow in sin).
Cplx log_sin_pi(Cplx z) {
    const Cplx i{0.0, 1.0};
    // sin(pi z) = (e^{i pi z} - e^{-i pi z}) / (2i)
    if (z.imag() > 0.0) {
        return -i * PI * z + std::log(std::exp(2.0 * i * PI * z) - 1.0) -
               std::log(2.0 * i);
    }
    return i * PI * z + std::log(1.0 - std::exp(-2.0 * i * PI * z)) -
           std::log(2.0 * i);
}

} // namespace

Cplx log_gamma(Cplx z) {
    if (!is_finite(z)) throw NumericError("log_gamma: non-finite argument");
    if (near_nonpositive_integer(z))
        throw NumericError("log_gamma: pole at non-positive integer");
    if (z.real() < 0.5) {
        // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return std::log(PI) - log_sin_pi(z) - log_gamma(1.0 - z);
    }
    static const double coef[14] = {
        57.1562356658629235,     -59.5979603554754912,
        14.1360979747417471,     -0.491913816097620199,
        3.39946499848118887e-5,  4.65236289270485756e-5,
        -9.83744753048795646e-5, 1.58088703224912494e-4,
        -2.10264441724104883e-4, 2.17439618115212643e-4,
        -1.64318106536763890e-4, 8.44182239838527433e-5,
        -2.61908384015814087e-5, 3.68991826595316234e-6};
    Cplx x = z;
    Cplx tmp = x + 5.24218750000000000;
    tmp = (x + 0.5) * std::log(tmp) - tmp;
    Cplx ser = 0.999999999999997092;
    Cplx y = x;
    for (double c : coef) {
        y += 1.0;
        ser += c / y;
    }
    return tmp + std::log(2.5066282746310005 * ser / x);
}

ComplexEval gamma_cpx(Cplx z) {
    if (near_nonpositive_integer(z))
        throw NumericError("gamma_cpx: pole at non-positive integer");
    Cplx lg = log_gamma(z);
    if (lg.real() > 700.0)
        throw NumericError("gamma_cpx: overflow, Re log Gamma = " +
                           std::to_string(lg.real()));
    Cplx v = std::exp(lg);
    if (!is_finite(v)) throw NumericError("gamma_cpx: non-finite result");
    return {v, std::abs(v) * 5e-15};
}

// --- Kummer M ----------------------------------------------------------------

namespace {

// Asymptotic expansion of M for large |z| (both exponential sectors kept).
ComplexEval kummer_m_asymptotic(Cplx a, Cplx b, Cplx z) {
    auto sector_sum = [](Cplx p, Cplx q, Cplx zinv) {
        // sum_s (p)_s (q)_s / s! * zinv^s, truncated at the smallest term
        Cplx term = 1.0, sum = 1.0;
        double smallest = 1.0;
        for (int s = 0; s < 60; ++s) {
            term *= (p + double(s)) * (q + double(s)) * zinv / double(s + 1);
            double mag = std::abs(term);
            if (mag > smallest) break; // divergent tail reached
            sum += term;
            smallest = mag;
            if (mag < 1e-18 * std::abs(sum)) break;
        }
        return std::pair<Cplx, double>{sum, smallest};
    };
    double sgn = (z.imag() >= 0.0) ? 1.0 : -1.0;
    // e^z z^{a-b} / Gamma(a) * F2  +  e^{sgn i pi a} z^{-a} / Gamma(b-a) * F1
    auto [f2, e2] = sector_sum(b - a, 1.0 - a, 1.0 / z);
    auto [f1, e1] = sector_sum(a, a - b + 1.0, -1.0 / z);
    Cplx lgb = log_gamma(b);
    Cplx t2 = std::exp(lgb - log_gamma(a) + z + (a - b) * std::log(z)) * f2;
    Cplx t1 = near_nonpositive_integer(b - a)
                  ? Cplx{0.0, 0.0}
                  : std::exp(lgb - log_gamma(b - a) + sgn * Cplx{0.0, PI} * a -
                             a * std::log(z)) *
                        f1;
    Cplx v = t1 + t2;
    double err = std::abs(t2) * (e2 + 1e-14) + std::abs(t1) * (e1 + 1e-14);
    return {v, err};
}

} // namespace

ComplexEval kummer_m(Cplx a, Cplx b, Cplx z) {
    if (near_nonpositive_integer(b))
        throw NumericError("kummer_m: parameter pole, b is a non-positive integer");
    if (z == Cplx{0.0, 0.0}) return {1.0, 0.0};
    if (std::abs(z) > 40.0 && !near_nonpositive_integer(a))
        return kummer_m_asymptotic(a, b, z);
    // Taylor series with compensated (Kahan) summation.
    Cplx sum = 1.0, comp = 0.0, term = 1.0;
    double max_mag = 1.0;
    const int cap = 10000;
    for (int n = 0; n < cap; ++n) {
        term *= (a + double(n)) / (b + double(n)) * z / double(n + 1);
        Cplx y = term - comp;
        Cplx t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        max_mag = std::max(max_mag, std::abs(term));
        if (std::abs(term) < 1e-17 * std::abs(sum) && n > 4) {
            double cancel = max_mag / std::max(std::abs(sum), 1e-300);
            return {sum, std::abs(sum) * 1e-15 * std::max(1.0, cancel)};
        }
    }
    throw NumericError("kummer_m: series did not converge in 1e4 terms, |z|=" +
                       std::to_string(std::abs(z)) +
                       ", |partial|=" + std::to_string(std::abs(sum)));
}

ComplexEval kummer_m_prime(Cplx a, Cplx b, Cplx z) {
    ComplexEval m = kummer_m(a + 1.0, b + 1.0, z);
    Cplx f = a / b;
    return {f * m.value, std::abs(f) * m.abs_err};
}

// --- Kummer U ----------------------------------------------------------------

namespace {

// Laplace integral along the ray arg t = phi, valid for Re a > 0.
ComplexEval kummer_u_ray(Cplx a, Cplx b, Cplx z) {
    double phi = -std::arg(z);
    // Keep the ray clear of the (1+t) branch cut direction.
    phi = std::clamp(phi, -0.45 * PI, 0.45 * PI);
    Cplx eip = std::exp(Cplx{0.0, phi});
    Cplx zr = z * eip; // Re zr > 0
    // Regularize the endpoint: t = u^p with p >= 1 so that Re(p a) >= 1.
    int p = std::max(1, (int)std::ceil(1.2 / a.real()));
    auto integrand = [&](double u) -> Cplx {
        if (u <= 0.0) return {0.0, 0.0};
        double up = std::pow(u, p);
        Cplx t = eip * up;
        return double(p) * std::exp(-zr * up + (a - 1.0) * std::log(t) +
                                    (b - a - 1.0) * std::log(1.0 + t) +
                                    double(p - 1) * std::log(u));
    };
    QuadOptions opt;
    opt.abs_tol = 1e-13;
    opt.rel_tol = 1e-13;
    // Split at the scale where e^{-zr u^p} starts to decay.
    double u1 = std::pow(1.0 / std::abs(zr), 1.0 / p);
    QuadResult r1 = integrate_gk(integrand, 0.0, u1, opt);
    // Tail in the original variable t (no endpoint issues there).
    auto tail = [&](double s) -> Cplx {
        Cplx t = eip * s;
        return std::exp(-zr * s + (a - 1.0) * std::log(t) +
                        (b - a - 1.0) * std::log(1.0 + t));
    };
    QuadResult r2 = integrate_to_inf(tail, std::pow(u1, p), std::abs(zr), opt);
    Cplx loop = eip * (r1.value + r2.value);
    Cplx g = std::exp(-log_gamma(a));
    Cplx v = g * loop;
    return {v, std::abs(g) * (r1.abs_err + r2.abs_err) + std::abs(v) * 1e-14};
}

// Loop-contour representation, usable for any a (used when Re a <= 0):
//   U(a,b,z) = Gamma(1-a) / (2 pi i e^{i pi a}) * Int_C e^{-zt} t^{a-1} (1+t)^{b-a-1} dt
// C runs from +inf (arg t = phi) clockwise-in, counterclockwise around 0 inside
// |t| < 1, and back out to +inf (arg t = phi + 2 pi).
ComplexEval kummer_u_loop(Cplx a, Cplx b, Cplx z) {
    if (near_nonpositive_integer(1.0 - a))
        throw NumericError("kummer_u_loop: Gamma(1-a) pole; use the ray form");
    double phi = std::clamp(-std::arg(z), -0.45 * PI, 0.45 * PI);
    Cplx eip = std::exp(Cplx{0.0, phi});
    Cplx zr = z * eip;
    const double rho = 0.5;
    QuadOptions opt;
    opt.abs_tol = 1e-13;
    opt.rel_tol = 1e-13;
    // Legs: arg t = phi (inward, factor -1) and arg t = phi + 2 pi.
    Cplx leg_factor = std::exp(Cplx{0.0, 2.0 * PI} * a) - 1.0;
    auto leg = [&](double s) -> Cplx {
        Cplx t = eip * s;
        return std::exp(-zr * s + (a - 1.0) * (std::log(s) + Cplx{0.0, phi}) +
                        (b - a - 1.0) * std::log(1.0 + t));
    };
    QuadResult rleg = integrate_gk(leg, rho, rho + 30.0 / std::abs(zr), opt);
    QuadResult rtail =
        integrate_to_inf(leg, rho + 30.0 / std::abs(zr), std::abs(zr), opt);
    // Circle |t| = rho, arg from phi to phi + 2 pi.
    auto circ = [&](double th) -> Cplx {
        Cplx t = rho * std::exp(Cplx{0.0, th});
        return std::exp(-z * t + (a - 1.0) * (std::log(rho) + Cplx{0.0, th}) +
                        (b - a - 1.0) * std::log(1.0 + t)) *
               Cplx{0.0, 1.0} * t;
    };
    QuadResult rcirc = integrate_gk(circ, phi, phi + 2.0 * PI, opt);
    Cplx loop = eip * leg_factor * (rleg.value + rtail.value) + rcirc.value;
    Cplx pref = std::exp(log_gamma(1.0 - a) - Cplx{0.0, PI} * a) /
                (2.0 * PI * Cplx{0.0, 1.0});
    Cplx v = pref * loop;
    double err = std::abs(pref) *
                 (std::abs(leg_factor) * (rleg.abs_err + rtail.abs_err) +
                  rcirc.abs_err);
    return {v, err + std::abs(v) * 1e-13};
}

ComplexEval kummer_u_asymptotic(Cplx a, Cplx b, Cplx z) {
    Cplx term = 1.0, sum = 1.0;
    double smallest = 1.0;
    bool converged = false;
    for (int s = 0; s < 60; ++s) {
        term *= -(a + double(s)) * (a - b + 1.0 + double(s)) / (z * double(s + 1));
        double mag = std::abs(term);
        if (mag > smallest) break;
        sum += term;
        smallest = mag;
        if (mag < 1e-16 * std::abs(sum)) {
            converged = true;
            break;
        }
    }
    if (!converged && smallest > 1e-14 * std::abs(sum))
        throw NumericError("kummer_u_asymptotic: expansion not accurate here");
    Cplx v = std::exp(-a * std::log(z)) * sum;
    return {v, std::abs(v) * (smallest + 1e-14)};
}

} // namespace

ComplexEval kummer_u(Cplx a, Cplx b, Cplx z) {
    if (z == Cplx{0.0, 0.0}) throw NumericError("kummer_u: z = 0");
    if (std::abs(z) > 60.0) {
        try {
            return kummer_u_asymptotic(a, b, z);
        } catch (const NumericError&) {
            // fall through to the integral forms
        }
    }
    if (a.real() > 0.3) return kummer_u_ray(a, b, z);
    return kummer_u_loop(a, b, z);
}

ComplexEval kummer_u_prime(Cplx a, Cplx b, Cplx z) {
    ComplexEval u = kummer_u(a + 1.0, b + 1.0, z);
    return {-a * u.value, std::abs(a) * u.abs_err};
}

// --- Whittaker ---------------------------------------------------------------

ComplexEval whittaker_mw(WhittakerKind kind, Cplx kappa, Cplx mu, Cplx z) {
    Cplx pre = std::exp(-0.5 * z + (mu + 0.5) * std::log(z));
    ComplexEval f = (kind == WhittakerKind::M)
                        ? kummer_m(mu + 0.5 - kappa, 1.0 + 2.0 * mu, z)
                        : kummer_u(mu + 0.5 - kappa, 1.0 + 2.0 * mu, z);
    return {pre * f.value, std::abs(pre) * f.abs_err};
}

ComplexEval whittaker_mw_prime(WhittakerKind kind, Cplx kappa, Cplx mu, Cplx z) {
    Cplx pre = std::exp(-0.5 * z + (mu + 0.5) * std::log(z));
    Cplx a = mu + 0.5 - kappa, b = 1.0 + 2.0 * mu;
    ComplexEval f, fp;
    if (kind == WhittakerKind::M) {
        f = kummer_m(a, b, z);
        fp = kummer_m_prime(a, b, z);
    } else {
        f = kummer_u(a, b, z);
        fp = kummer_u_prime(a, b, z);
    }
    Cplx v = pre * ((-0.5 + (mu + 0.5) / z) * f.value + fp.value);
    double err = std::abs(pre) * ((0.5 + std::abs((mu + 0.5) / z)) * f.abs_err +
                                  fp.abs_err);
    return {v, err};
}

// --- Spherical Bessel closed forms -------------------------------------------

namespace {

double cml(int l, int m) {
    // (l+m)! / (m! (l-m)!)
    double num = 1.0;
    for (int j = l - m + 1; j <= l + m; ++j) num *= double(j);
    double den = 1.0;
    for (int j = 2; j <= m; ++j) den *= double(j);
    return num / den;
}

double dfact(int n) { // n!! with (-1)!! = 1
    double v = 1.0;
    for (int k = n; k > 1; k -= 2) v *= double(k);
    return v;
}

Cplx sph_i_series(int l, Cplx z) {
    Cplx z2h = 0.5 * z * z;
    Cplx term = 1.0, sum = 1.0;
    for (int j = 1; j < 200; ++j) {
        term *= z2h / (double(j) * double(2 * l + 2 * j + 1));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    Cplx zl = std::pow(z, l);
    return zl / dfact(2 * l + 1) * sum;
}

Cplx sph_j_series(int l, Cplx z) {
    Cplx z2h = -0.5 * z * z;
    Cplx term = 1.0, sum = 1.0;
    for (int j = 1; j < 200; ++j) {
        term *= z2h / (double(j) * double(2 * l + 2 * j + 1));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    Cplx zl = std::pow(z, l);
    return zl / dfact(2 * l + 1) * sum;
}

} // namespace

Cplx sph_k(int l, Cplx z) {
    if (z == Cplx{0.0, 0.0}) throw NumericError("sph_k: zero argument");
    Cplx s = 0.0;
    for (int m = 0; m <= l; ++m) s += cml(l, m) * std::pow(2.0 * z, -m);
    return 0.5 * PI * std::exp(-z) / z * s;
}

Cplx sph_i(int l, Cplx z) {
    if (std::abs(z) < std::max(6.0, 1.5 * l)) return sph_i_series(l, z);
    Cplx sp = 0.0, sm = 0.0;
    for (int m = 0; m <= l; ++m) {
        Cplx t = cml(l, m) * std::pow(2.0 * z, -m);
        sp += (m % 2 ? -t : t);
        sm += t;
    }
    double sgn = (l % 2 ? -1.0 : 1.0);
    return (std::exp(z) * sp - sgn * std::exp(-z) * sm) / (2.0 * z);
}

Cplx sph_j(int l, Cplx z) {
    if (std::abs(z) < std::max(6.0, 1.5 * l)) return sph_j_series(l, z);
    Cplx il = sph_i(l, Cplx{0.0, 1.0} * z);
    Cplx fac = std::pow(Cplx{0.0, -1.0}, l);
    return fac * il;
}

namespace {

Cplx sph_h1(int l, Cplx z) {
    if (z == Cplx{0.0, 0.0}) throw NumericError("sph_h1: zero argument");
    Cplx s = 0.0;
    for (int m = 0; m <= l; ++m)
        s += cml(l, m) * std::pow(Cplx{0.0, 1.0}, m) * std::pow(2.0 * z, -m);
    return std::pow(Cplx{0.0, -1.0}, l + 1) * std::exp(Cplx{0.0, 1.0} * z) / z * s;
}

} // namespace

Cplx sph_y(int l, Cplx z) {
    if (z == Cplx{0.0, 0.0}) throw NumericError("sph_y: zero argument");
    return (sph_h1(l, z) - sph_j(l, z)) / Cplx{0.0, 1.0};
}

ComplexEval bessel_halfint(BesselKind kind, int l, Cplx zeta) {
    if (l < 0) throw ValidationError("bessel_halfint: l must be >= 0");
    if (zeta == Cplx{0.0, 0.0} &&
        (kind == BesselKind::Y || kind == BesselKind::K))
        throw NumericError("bessel_halfint: zero argument for singular kind");
    Cplx pre = std::sqrt(2.0 * zeta / PI);
    Cplx v;
    switch (kind) {
        case BesselKind::J: v = pre * sph_j(l, zeta); break;
        case BesselKind::Y: v = pre * sph_y(l, zeta); break;
        case BesselKind::I: v = pre * sph_i(l, zeta); break;
        case BesselKind::K: v = pre * sph_k(l, zeta); break;
        default: throw ValidationError("bessel_halfint: bad kind");
    }
    if (!is_finite(v)) throw NumericError("bessel_halfint: non-finite result");
    return {v, std::abs(v) * 1e-13};
}

double bessel_jn(int n, double x) { return std::cyl_bessel_j(double(n), x); }
double bessel_yn(int n, double x) { return std::cyl_neumann(double(n), x); }

// --- Auxiliary integral G_{2l+1} ----------------------------------------------

ComplexEval g_aux(int l, double nu) {
    if (nu <= 0.0) throw ValidationError("g_aux: nu must be > 0");
    const double n = 2.0 * l + 1.0;
    // Upper limit where nu sinh t - n t > 50.
    double T = 1.0;
    while (nu * std::sinh(T) - n * T < 50.0 && T < 500.0) T *= 1.25;
    auto f = [&](double t) -> Cplx {
        return std::sinh(n * t) * std::exp(-nu * std::sinh(t));
    };
    QuadOptions opt;
    opt.abs_tol = 1e-12;
    opt.rel_tol = 1e-12;
    QuadResult r = integrate_gk(f, 0.0, T, opt);
    double v = 2.0 / PI * r.value.real();
    return {Cplx{v, 0.0}, 2.0 / PI * r.abs_err + 1e-14 * std::abs(v)};
}

} // namespace ion
