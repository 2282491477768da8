#include "ion/green.hpp"

#include <algorithm>
#include <cmath>

#include "ion/quadrature.hpp"
#include "ion/special.hpp"

namespace ion {

namespace {

double dist(const Vec3& x, const Vec3& y) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(s);
}

double norm3(const Vec3& x) { return dist(x, {0.0, 0.0, 0.0}); }

} // namespace

ProlatePair prolate_coords(const Vec3& x, const Vec3& xp) {
    double d = dist(x, xp);
    if (d == 0.0) throw NumericError("prolate_coords: coincident points");
    ProlatePair pp;
    pp.xi = norm3(x) + norm3(xp) + d;
    pp.eta = norm3(x) + norm3(xp) - d;
    return pp;
}

// --- contour_IJ ---------------------------------------------------------------

namespace {

// I(z) and Idot(z) along the ray of fastest decay. Integrand
// e^{-z t} t^{-i nu + m} (1+t)^{i nu}, m = 0 or 1.
ComplexEval ray_I(Cplx z, Cplx nu, int m) {
    // exponent decays fastest along arg t = -arg z; stay off the (1+t) cut.
    double phi = std::clamp(-std::arg(z), -0.497 * PI, 0.497 * PI);
    Cplx eip = std::exp(Cplx{0.0, phi});
    Cplx zr = z * eip;
    if (zr.real() <= 0.0) throw NumericError("contour_IJ: divergent I-ray");
    Cplx az = -I_UNIT * nu + double(m); // t-exponent
    // endpoint regularization t = u^p, p so that Re(p (az+1)) >= 1
    int p = std::max(1, (int)std::ceil(1.2 / (az.real() + 1.0)));
    QuadOptions opt;
    opt.abs_tol = 1e-13;
    opt.rel_tol = 1e-13;
    auto head = [&](double u) -> Cplx {
        if (u <= 0.0) return {0.0, 0.0};
        double up = std::pow(u, p);
        Cplx t = eip * up;
        return double(p) *
               std::exp(-zr * up + az * std::log(t) + I_UNIT * nu * std::log(1.0 + t) +
                        double(p - 1) * std::log(u));
    };
    double u1 = std::pow(1.0 / std::abs(zr), 1.0 / p);
    QuadResult r1 = integrate_gk(head, 0.0, u1, opt);
    auto tail = [&](double s) -> Cplx {
        Cplx t = eip * s;
        return std::exp(-zr * s + az * std::log(t) + I_UNIT * nu * std::log(1.0 + t));
    };
    QuadResult r2 = integrate_to_inf(tail, std::pow(u1, p), std::abs(zr), opt);
    Cplx v = eip * (r1.value + r2.value);
    double sgn = (m == 1) ? -1.0 : 1.0; // Idot carries a minus sign
    return {sgn * v, r1.abs_err + r2.abs_err + std::abs(v) * 1e-14};
}

// Direct J for |Im nu| < 1: Int_0^1 e^{z t} t^{-i nu + m} (1-t)^{i nu} dt.
ComplexEval direct_J(Cplx z, Cplx nu, int m) {
    Cplx a0 = -I_UNIT * nu + double(m); // exponent at t = 0
    Cplx a1 = I_UNIT * nu;              // exponent at t = 1
    // split at 1/2 and regularize each endpoint by a power substitution
    QuadOptions opt;
    opt.abs_tol = 1e-13;
    opt.rel_tol = 1e-13;
    int p0 = std::max(1, (int)std::ceil(1.5 / (a0.real() + 1.0)));
    auto left = [&](double u) -> Cplx {
        if (u <= 0.0) return {0.0, 0.0};
        double t = std::pow(u, p0);
        return double(p0) * std::exp(z * t + a0 * std::log(t) + a1 * std::log1p(-t) +
                                     double(p0 - 1) * std::log(u));
    };
    QuadResult rl = integrate_gk(left, 0.0, std::pow(0.5, 1.0 / p0), opt);
    int p1 = std::max(1, (int)std::ceil(1.5 / (a1.real() + 1.0)));
    auto right = [&](double u) -> Cplx { // t = 1 - u^{p1}
        if (u <= 0.0) return {0.0, 0.0};
        double s = std::pow(u, p1); // 1 - t
        return double(p1) * std::exp(z * (1.0 - s) + a0 * std::log1p(-s) +
                                     a1 * std::log(s) + double(p1 - 1) * std::log(u));
    };
    QuadResult rr = integrate_gk(right, 0.0, std::pow(0.5, 1.0 / p1), opt);
    Cplx v = rl.value + rr.value;
    return {v, rl.abs_err + rr.abs_err + std::abs(v) * 1e-14};
}

// Stadium contour around [0,1] at distance 1/4, for nu outside the strip.
// Branch bookkeeping per segment; the whole product t^{-i nu}(1-t)^{i nu} is
// single-valued along the loop.
ComplexEval stadium_J(Cplx z, Cplx nu, int m) {
    const double rho = 0.25;
    QuadOptions opt;
    opt.abs_tol = 1e-12;
    opt.rel_tol = 1e-12;
    Cplx a0 = -I_UNIT * nu + double(m);
    Cplx a1 = I_UNIT * nu;
    Cplx total = 0.0;
    double err = 0.0;
    // segment A: right cap t = 1 + rho e^{i th}, th in [-pi/2, pi/2];
    //   arg t principal, arg(1-t) = th + pi
    auto segA = [&](double th) -> Cplx {
        Cplx t = 1.0 + rho * std::exp(Cplx{0.0, th});
        Cplx dt = rho * I_UNIT * std::exp(Cplx{0.0, th});
        Cplx lg1mt = std::log(rho) + Cplx{0.0, th + PI};
        return std::exp(z * t + a0 * std::log(t) + a1 * lg1mt) * dt;
    };
    QuadResult rA = integrate_gk(segA, -0.5 * PI, 0.5 * PI, opt);
    // segment B: top edge t = x + i rho, x from 1 to 0; arg(1-t) = princ + 2 pi
    auto segB = [&](double x) -> Cplx {
        Cplx t{x, rho};
        Cplx lg1mt = std::log(1.0 - t) + Cplx{0.0, 2.0 * PI};
        return -std::exp(z * t + a0 * std::log(t) + a1 * lg1mt); // dt = -dx
    };
    QuadResult rB = integrate_gk(segB, 0.0, 1.0, opt);
    rB.value = -rB.value; // orient x: 1 -> 0
    // segment C: left cap t = rho e^{i th}, th in [pi/2, 3 pi/2];
    //   arg t = th, arg(1-t) = princ + 2 pi
    auto segC = [&](double th) -> Cplx {
        Cplx t = rho * std::exp(Cplx{0.0, th});
        Cplx dt = rho * I_UNIT * std::exp(Cplx{0.0, th});
        Cplx lgt = std::log(rho) + Cplx{0.0, th};
        Cplx lg1mt = std::log(1.0 - t) + Cplx{0.0, 2.0 * PI};
        return std::exp(z * t + a0 * lgt + a1 * lg1mt) * dt;
    };
    QuadResult rC = integrate_gk(segC, 0.5 * PI, 1.5 * PI, opt);
    // segment D: bottom edge t = x - i rho, x from 0 to 1;
    //   arg t = princ + 2 pi, arg(1-t) = princ + 2 pi
    auto segD = [&](double x) -> Cplx {
        Cplx t{x, -rho};
        Cplx lgt = std::log(t) + Cplx{0.0, 2.0 * PI};
        Cplx lg1mt = std::log(1.0 - t) + Cplx{0.0, 2.0 * PI};
        return std::exp(z * t + a0 * lgt + a1 * lg1mt);
    };
    QuadResult rD = integrate_gk(segD, 0.0, 1.0, opt);
    total = rA.value + rB.value + rC.value + rD.value;
    err = rA.abs_err + rB.abs_err + rC.abs_err + rD.abs_err;
    Cplx denom = 1.0 - std::exp(-2.0 * PI * nu);
    if (std::abs(denom) < 1e-14)
        throw NumericError("stadium_J: 1 - e^{-2 pi nu} vanishes (integer i nu)");
    Cplx v = total / denom;
    return {v, err / std::abs(denom) + std::abs(v) * 1e-13};
}

ComplexEval eval_J(Cplx z, Cplx nu, int m) {
    if (std::abs(nu.imag()) < 0.9) return direct_J(z, nu, m);
    return stadium_J(z, nu, m);
}

} // namespace

ContourIJ contour_IJ(Cplx z, Cplx nu) {
    ContourIJ out;
    out.I = ray_I(z, nu, 0);
    out.Idot = ray_I(z, nu, 1);
    out.J = eval_J(z, nu, 0);
    out.Jdot = eval_J(z, nu, 1);
    return out;
}

// --- green_full ----------------------------------------------------------------

ComplexEval green_full(const Vec3& x, const Vec3& xp, Cplx k, double b) {
    ProlatePair pp = prolate_coords(x, xp);
    Cplx nu = Cplx{0.5 * b, 0.0} / k;
    Cplx z1 = -I_UNIT * k * pp.xi;
    Cplx z2 = -I_UNIT * k * pp.eta;
    // Whittaker W(z1) and M(z2) built from the integral representations,
    //   W = e^{-z/2} z I(z) / Gamma(1-i nu),
    //   M = e^{-z/2} z J(z) / (Gamma(1-i nu) Gamma(1+i nu)),
    // and the derivative form of the Green's function:
    //   G = -Gamma(1-i nu) [W'(z1) M(z2) - W(z1) M'(z2)] / (4 pi |x-x'|).
    ContourIJ c1 = contour_IJ(z1, nu);
    ContourIJ c2 = contour_IJ(z2, nu);
    Cplx g1 = std::exp(log_gamma(1.0 - I_UNIT * nu));
    Cplx g2 = std::exp(log_gamma(1.0 + I_UNIT * nu));
    auto wpair = [&](Cplx z, const ContourIJ& c) {
        Cplx w = std::exp(-0.5 * z) * z * c.I.value / g1;
        Cplx wp = std::exp(-0.5 * z) *
                  ((1.0 - 0.5 * z) * c.I.value + z * c.Idot.value) / g1;
        return std::pair<Cplx, Cplx>{w, wp};
    };
    auto mpair = [&](Cplx z, const ContourIJ& c) {
        Cplx mm = std::exp(-0.5 * z) * z * c.J.value / (g1 * g2);
        Cplx mp = std::exp(-0.5 * z) *
                  ((1.0 - 0.5 * z) * c.J.value + z * c.Jdot.value) / (g1 * g2);
        return std::pair<Cplx, Cplx>{mm, mp};
    };
    auto [w, wp] = wpair(z1, c1);
    auto [mm, mp] = mpair(z2, c2);
    double d = 0.5 * (pp.xi - pp.eta);
    Cplx v = -g1 * (wp * mm - w * mp) / (4.0 * PI * d);
    double err = std::abs(g1) / (4.0 * PI * d) *
                 (std::abs(mm) * (c1.I.abs_err + c1.Idot.abs_err) +
                  std::abs(w) * (c2.J.abs_err + c2.Jdot.abs_err)) *
                 (1.0 + std::abs(z1) + std::abs(z2));
    if (!is_finite(v)) throw NumericError("green_full: non-finite value");
    return {v, err + std::abs(v) * 1e-12};
}

// --- steepest-descent M contours ------------------------------------------------

Cplx m_contour_saddle_upper(Cplx eps2) {
    return I_UNIT * std::sqrt(1.0 - 0.25 * eps2 * eps2) - 0.5 * eps2;
}

namespace {

// P(tau; eps2) and its derivative, principal log (contours stay at |tau| ~ 1,
// away from the branch points 0 and -eps2).
Cplx P_fn(Cplx tau, Cplx eps2) {
    if (std::abs(eps2) < 1e-8) {
        // -log(1 + e/t)/e = -1/t + e/(2 t^2) - e^2/(3 t^3) + ...
        Cplx it = 1.0 / tau;
        return tau - it + 0.5 * eps2 * it * it - eps2 * eps2 * it * it * it / 3.0;
    }
    return tau - std::log(1.0 + eps2 / tau) / eps2;
}

Cplx Pp_fn(Cplx tau, Cplx eps2) { return 1.0 + 1.0 / (tau * (tau + eps2)); }

// Trace one steepest-descent branch from the saddle (starting direction
// start_dir) and integrate f(tau) e^{-zeta (P - P(saddle))} along it, by
// integrating the gradient-flow ODE dtau/ds = conj(P')/|P'| with RK4.
// Along this flow Im P stays constant and Re P increases, so the integrand
// decays monotonically.
Cplx descend(Cplx tau_s, Cplx eps2, double zeta, int l, int mom, Cplx start_dir,
             double& err) {
    Cplx P0 = P_fn(tau_s, eps2);
    auto integrand = [&](Cplx t) -> Cplx {
        Cplx lg = double(l + mom) * std::log(t) + double(l) * std::log(t + eps2);
        return std::exp(lg - zeta * (P_fn(t, eps2) - P0));
    };
    auto vel = [&](Cplx t) -> Cplx {
        Cplx dP = Pp_fn(t, eps2);
        double m = std::abs(dP);
        if (m < 1e-14) return start_dir;
        return std::conj(dP) / m;
    };
    // Step off the saddle analytically (P' vanishes there).
    const double delta = 1e-5;
    Cplx tau = tau_s + delta * start_dir;
    Cplx total = integrand(tau_s) * delta * start_dir;
    const double h = 5e-3;
    const int max_steps = 60000;
    for (int it = 0; it < max_steps; ++it) {
        // RK4 for (tau, I) with dI/ds = f(tau) v(tau)
        Cplx k1t = vel(tau), k1i = integrand(tau) * k1t;
        Cplx t2 = tau + 0.5 * h * k1t;
        Cplx k2t = vel(t2), k2i = integrand(t2) * k2t;
        Cplx t3 = tau + 0.5 * h * k2t;
        Cplx k3t = vel(t3), k3i = integrand(t3) * k3t;
        Cplx t4 = tau + h * k3t;
        Cplx k4t = vel(t4), k4i = integrand(t4) * k4t;
        tau += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        total += h / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i);
        if (it % 40 == 39) {
            // re-project onto Im P = Im P0 (drift control)
            double im = (P_fn(tau, eps2) - P0).imag();
            Cplx dP = Pp_fn(tau, eps2);
            if (std::abs(dP) > 1e-12) tau -= Cplx{0.0, im} / dP;
        }
        double decay = (P_fn(tau, eps2) - P0).real() * zeta;
        if (decay > 46.0) break;
        if (std::abs(tau + eps2) < 5e-3 || std::abs(tau) < 5e-3) break;
        if (it == max_steps - 1)
            throw NumericError("m_contour: descent path did not terminate");
    }
    err += std::abs(total) * 1e-9;
    return total;
}

} // namespace

ComplexEval m_contour(int which, double zeta, Cplx eps2, int l) {
    if (which < 1 || which > 4) throw ValidationError("m_contour: which in 1..4");
    if (std::abs(eps2) >= 0.75)
        throw NumericError("m_contour: |eps2| too large for the saddle route");
    int mom = (which >= 3) ? 1 : 0;
    bool upper = (which == 1 || which == 3);
    Cplx tau_s = m_contour_saddle_upper(eps2);
    if (!upper) tau_s = -I_UNIT * std::sqrt(1.0 - 0.25 * eps2 * eps2) - 0.5 * eps2;
    // Starting direction where P''(tau_s) dir^2 > 0; the principal choice has
    // Re dir >= 0 and marks the branch running out to +inf.
    Cplx Ppp = -(2.0 * tau_s + eps2) /
               (tau_s * tau_s * (tau_s + eps2) * (tau_s + eps2));
    Cplx dir = std::exp(Cplx{0.0, -0.5 * std::arg(Ppp)});
    if (dir.real() < 0.0) dir = -dir;
    double err = 0.0;
    Cplx half_plus = descend(tau_s, eps2, zeta, l, mom, dir, err);
    Cplx half_minus = descend(tau_s, eps2, zeta, l, mom, -dir, err);
    // C1 runs from +inf to -eps2 (upper saddle); C2 from -eps2 to +inf (lower).
    Cplx path_int = upper ? (-half_plus + half_minus) : (-half_minus + half_plus);
    Cplx P0 = P_fn(tau_s, eps2);
    Cplx v = std::exp(-zeta * P0) * path_int / (PI * I_UNIT);
    return {v, (err * std::exp(-zeta * P0.real()) / PI) + std::abs(v) * 1e-9};
}

ComplexEval m_contour_cont(int which, double zeta, Cplx eps2, int l) {
    double ang = std::arg(eps2 + 1e-300);
    if (std::abs(eps2) < 1e-12 || (ang > -0.16 * PI && ang < 0.16 * PI))
        return m_contour(which, zeta, eps2, l);
    // Taylor continuation from the real axis, one-sided Fornberg stencil.
    const int NS = 5, ORD = 3;
    const double h = 0.12;
    static const double w[4][5] = {
        // weights for d^m at 0 from nodes {0, h, 2h, 3h, 4h} (scaled by h^-m)
        {1.0, 0.0, 0.0, 0.0, 0.0},
        {-25.0 / 12, 4.0, -3.0, 4.0 / 3, -1.0 / 4},
        {35.0 / 12, -26.0 / 3, 19.0 / 2, -14.0 / 3, 11.0 / 12},
        {-5.0 / 2, 9.0, -12.0, 7.0, -3.0 / 2}};
    Cplx vals[NS];
    double err = 0.0;
    for (int j = 0; j < NS; ++j) {
        ComplexEval e = m_contour(which, zeta, Cplx{h * j, 0.0}, l);
        vals[j] = e.value;
        err += e.abs_err;
    }
    Cplx sum = 0.0, pw = 1.0;
    double fact = 1.0;
    for (int m = 0; m <= ORD; ++m) {
        Cplx dm = 0.0;
        for (int j = 0; j < NS; ++j) dm += w[m][j] * vals[j];
        dm /= std::pow(h, m);
        if (m > 0) fact *= m;
        sum += dm * pw / fact;
        pw *= eps2;
    }
    // truncation estimate: next-order scale with radius-2 coefficient decay
    double trunc = std::abs(sum) * std::pow(std::abs(eps2) / 2.0, ORD + 1);
    return {sum, err + trunc + std::abs(sum) * 1e-6};
}

ComplexEval w2_ratio(Cplx lambda, Cplx Z, double a, double b, int l) {
    Cplx eps2 = 2.0 * lambda * std::sqrt(a / b);
    double zeta = std::sqrt(a * b);
    if (std::abs(eps2) > 0.6)
        throw NumericError("w2_ratio: |eps2| too large for the small-lambda form");
    ComplexEval m1 = m_contour_cont(1, zeta, eps2, l);
    ComplexEval m2 = m_contour_cont(2, zeta, eps2, l);
    ComplexEval m3 = m_contour_cont(3, zeta, eps2, l);
    ComplexEval m4 = m_contour_cont(4, zeta, eps2, l);
    Cplx Z2 = Z * Z;
    Cplx num = Z2 * m3.value + m4.value;
    Cplx den = Z2 * m1.value + m2.value;
    if (std::abs(den) < 1e-13 * (std::abs(Z2 * m1.value) + std::abs(m2.value)))
        throw NumericError("w2_ratio: Z^2 M1 + M2 vanishes");
    Cplx v = -lambda + double(l) / a - std::sqrt(b / a) * num / den;
    double err = std::sqrt(b / a) / std::abs(den) *
                 (std::abs(Z2) * (m3.abs_err + m1.abs_err * std::abs(num / den)) +
                  m4.abs_err + m2.abs_err * std::abs(num / den));
    return {v, err + std::abs(v) * 1e-11};
}

// --- loop contour for H (Eq. 208 family) ---------------------------------------

ComplexEval loop_H(Cplx z, Cplx kappa, int l, int moment) {
    // Integrand t^{l - kappa + moment} (1 + t)^{l + kappa} e^{-z t}; contour
    // from +inf e^{i phi} around 0 (radius rho) to +inf e^{i (phi + 2 pi)}.
    double phi = std::clamp(-std::arg(z), -0.45 * PI, 0.45 * PI);
    Cplx eip = std::exp(Cplx{0.0, phi});
    Cplx zr = z * eip;
    if (zr.real() <= 0.0) throw NumericError("loop_H: cannot rotate legs into decay");
    const double rho = 0.5;
    Cplx ea = double(l) - kappa + double(moment); // t-exponent on the legs
    QuadOptions opt;
    opt.abs_tol = 1e-12;
    opt.rel_tol = 1e-12;
    Cplx leg_factor = std::exp(Cplx{0.0, 2.0 * PI} * ea) - 1.0;
    auto leg = [&](double s) -> Cplx {
        Cplx t = eip * s;
        return std::exp(-zr * s + ea * (std::log(s) + Cplx{0.0, phi}) +
                        (double(l) + kappa) * std::log(1.0 + t));
    };
    double cut = rho + 40.0 / std::abs(zr);
    QuadResult rleg = integrate_gk(leg, rho, cut, opt);
    QuadResult rtail = integrate_to_inf(leg, cut, std::abs(zr), opt);
    auto circ = [&](double th) -> Cplx {
        Cplx t = rho * std::exp(Cplx{0.0, th});
        return std::exp(-z * t + ea * (std::log(rho) + Cplx{0.0, th}) +
                        (double(l) + kappa) * std::log(1.0 + t)) *
               I_UNIT * t;
    };
    QuadResult rcirc = integrate_gk(circ, phi, phi + 2.0 * PI, opt);
    Cplx v = eip * leg_factor * (rleg.value + rtail.value) + rcirc.value;
    double err = std::abs(leg_factor) * (rleg.abs_err + rtail.abs_err) + rcirc.abs_err;
    return {v, err + std::abs(v) * 1e-12};
}

// --- exterior logarithmic derivative -------------------------------------------

Cplx exterior_logderiv(Cplx lambda, double a, double b, int l) {
    Cplx kappa = Cplx{0.5 * b, 0.0} / lambda;
    Cplx z = 2.0 * lambda * a;
    Cplx aU = double(l) + 1.0 - kappa; // U-parameter a
    Cplx eps2 = 2.0 * lambda * std::sqrt(a / b);
    // Small lambda (any direction): steepest-descent contour form. This is
    // the only usable route once |kappa| is large, since both the Laplace ray
    // (t^{ -kappa} oscillation) and the loop contour (rho^{-Re kappa} or
    // e^{|Im kappa| arg} growth) degenerate.
    if (std::abs(eps2) < 0.6 && std::abs(kappa) > 2.0) {
        Cplx ipk = I_UNIT * PI * Cplx{0.5 * b, 0.0} / lambda;
        Cplx Z = (ipk.real() < -700.0) ? Cplx{0.0, 0.0} : std::exp(ipk);
        return w2_ratio(lambda, Z, a, b, l).value;
    }
    if (aU.real() > 0.6 && std::abs(kappa.imag()) < 25.0) {
        // Direct route: w2 = W_{kappa, l+1/2}(2 lambda r)/r, so
        // u2'/u2 = 2 lambda W'(z)/W(z) and w2'/w2 = u2'/u2 - 1/a.
        ComplexEval w = whittaker_mw(WhittakerKind::W, kappa, double(l) + 0.5, z);
        ComplexEval wp = whittaker_mw_prime(WhittakerKind::W, kappa, double(l) + 0.5, z);
        if (std::abs(w.value) < 1e-280) throw NumericError("exterior_logderiv: W underflow");
        return 2.0 * lambda * wp.value / w.value - 1.0 / a;
    }
    if (std::abs(kappa.imag()) > 45.0 || kappa.real() > 12.0) {
        // deep small-|lambda| corner off the validated saddle sector
        Cplx ipk = I_UNIT * PI * Cplx{0.5 * b, 0.0} / lambda;
        Cplx Z = (ipk.real() < -700.0) ? Cplx{0.0, 0.0} : std::exp(ipk);
        return w2_ratio(lambda, Z, a, b, l).value;
    }
    // Loop-contour route: w2'/w2 = -lambda + l/a - 2 lambda H1/H.
    ComplexEval h0 = loop_H(z, kappa, l, 0);
    ComplexEval h1 = loop_H(z, kappa, l, 1);
    if (std::abs(h0.value) < 1e-280) throw NumericError("exterior_logderiv: loop H underflow");
    return -lambda + double(l) / a - 2.0 * lambda * h1.value / h0.value;
}

// --- Whittaker-assembled radial resolvent ---------------------------------------

RadialResolventResult radial_resolvent(const std::vector<Cplx>& g,
                                       const RadialGrid& grid, int l,
                                       const SpectralPoint& sp,
                                       const RegularizationParams& rp,
                                       double b, bool beta_on) {
    const std::size_t n = grid.size();
    if (g.size() != n) throw ValidationError("radial_resolvent: size mismatch");
    const double a = rp.a;
    Cplx lambda = sp.lambda;
    Cplx alpha = beta_on ? std::sqrt(lambda * lambda - I_UNIT * rp.c) : lambda;
    if (beta_on && alpha.imag() > 0.0) alpha = -alpha;
    Cplx kap1 = Cplx{0.5 * b, 0.0} / alpha;
    Cplx mu = double(l) + 0.5;

    // Interior homogeneous pair in u = r f form: u1 = M(2 alpha r), u2 = W(2 alpha r).
    std::vector<Cplx> u1(n), u1p(n), u2(n), u2p(n);
    for (std::size_t j = 0; j < n; ++j) {
        Cplx z = 2.0 * alpha * grid.r[j];
        u1[j] = whittaker_mw(WhittakerKind::M, kap1, mu, z).value;
        u1p[j] = 2.0 * alpha * whittaker_mw_prime(WhittakerKind::M, kap1, mu, z).value;
        u2[j] = whittaker_mw(WhittakerKind::W, kap1, mu, z).value;
        u2p[j] = 2.0 * alpha * whittaker_mw_prime(WhittakerKind::W, kap1, mu, z).value;
    }
    // Wronskian u1 u2' - u2 u1' = -2 alpha Gamma(2l+2)/Gamma(l+1-kappa1).
    Cplx wron = -2.0 * alpha * std::exp(log_gamma(2.0 * l + 2.0) -
                                        log_gamma(double(l) + 1.0 - kap1));
    // Particular solution u_p = -[u1 Int_r^a u2 s g + u2 Int_0^r u1 s g] / wron
    // via cumulative trapezoid on the grid.
    std::vector<Cplx> c_lo(n), c_hi(n); // Int_0^r u1 s g ds, Int_r^a u2 s g ds
    Cplx acc = 0.0;
    double rprev = 0.0;
    Cplx fprev = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        Cplx fj = u1[j] * grid.r[j] * g[j];
        acc += 0.5 * (fj + fprev) * (grid.r[j] - rprev);
        c_lo[j] = acc;
        fprev = fj;
        rprev = grid.r[j];
    }
    acc = 0.0;
    for (std::size_t j = n; j-- > 0;) {
        double rnext = (j + 1 < n) ? grid.r[j + 1] : grid.r[n - 1];
        Cplx fnext = (j + 1 < n) ? u2[j + 1] * rnext * g[j + 1] : Cplx{0.0, 0.0};
        Cplx fj = u2[j] * grid.r[j] * g[j];
        if (j + 1 < n) acc += 0.5 * (fj + fnext) * (rnext - grid.r[j]);
        c_hi[j] = acc;
    }
    std::vector<Cplx> up(n), upp(n);
    for (std::size_t j = 0; j < n; ++j) {
        up[j] = -(u1[j] * c_hi[j] + u2[j] * c_lo[j]) / wron;
        upp[j] = -(u1p[j] * c_hi[j] + u2p[j] * c_lo[j]) / wron;
    }
    // Matching at r = a (last node) against the exterior w2 log-derivative.
    std::size_t ja = n - 1;
    double ra = grid.r[ja];
    Cplx gam_f = exterior_logderiv(lambda, a, b, l); // w2'(a)/w2(a), f-form
    // In f = u/r variables: f0 = up/r, m1 = u1/r.
    Cplx f0 = up[ja] / ra;
    Cplx f0p = upp[ja] / ra - up[ja] / (ra * ra);
    Cplx m1 = u1[ja] / ra;
    Cplx m1p = u1p[ja] / ra - u1[ja] / (ra * ra);
    CoeffAInput ain{f0, f0p, m1, m1p, gam_f};
    Cplx A = coeff_A(ain).value;
    RadialResolventResult out;
    out.A = A;
    out.B = (A * m1 + f0); // value of f at a equals B w2(a); store f(a) scale
    out.f.resize(n);
    out.fp.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        double r = grid.r[j];
        Cplx u = A * u1[j] + up[j];
        Cplx du = A * u1p[j] + upp[j];
        out.f[j] = u / r;
        out.fp[j] = du / r - u / (r * r);
    }
    return out;
}

ComplexEval coeff_A(const CoeffAInput& in) {
    // A = (f0 w2' - f0' w2)/(m1' w2 - m1 w2') = (f0 g - f0')/(m1' - m1 g),
    // g = w2'/w2.
    Cplx den = in.m1p - in.m1 * in.w2_ld;
    double scale = std::abs(in.m1p) + std::abs(in.m1 * in.w2_ld);
    if (std::abs(den) < 1e-12 * scale)
        throw NumericError("coeff_A: resolvent pole (vanishing denominator)");
    Cplx v = (in.f0 * in.w2_ld - in.f0p) / den;
    return {v, std::abs(v) * 1e-11};
}

ComplexEval coeff_A_denominator(Cplx lambda, Cplx Z, double a, double b,
                                double c, int l) {
    // Scale-free denominator ratio |m1' w2 - m1 w2'| / (|m1' w2| + |m1 w2'|)
    // with w2 built from the stripped contour form Z^2 M1 + M2; a value
    // bounded away from zero means A has no pole at this (lambda, Z).
    Cplx alpha = std::sqrt(lambda * lambda - I_UNIT * c);
    if (alpha.imag() > 0.0) alpha = -alpha;
    Cplx kap1 = Cplx{0.5 * b, 0.0} / alpha;
    Cplx mu = double(l) + 0.5;
    Cplx z = 2.0 * alpha * a;
    Cplx m1 = whittaker_mw(WhittakerKind::M, kap1, mu, z).value / a;
    Cplx m1p = (2.0 * alpha * whittaker_mw_prime(WhittakerKind::M, kap1, mu, z).value -
                m1) /
               a;
    double zeta = std::sqrt(a * b);
    Cplx eps2 = 2.0 * lambda * std::sqrt(a / b);
    Cplx M1 = m_contour_cont(1, zeta, eps2, l).value;
    Cplx M2 = m_contour_cont(2, zeta, eps2, l).value;
    Cplx M3 = m_contour_cont(3, zeta, eps2, l).value;
    Cplx M4 = m_contour_cont(4, zeta, eps2, l).value;
    Cplx Z2 = Z * Z;
    Cplx wt = Z2 * M1 + M2;
    Cplx wtp = (-lambda + double(l) / a) * wt - std::sqrt(b / a) * (Z2 * M3 + M4);
    Cplx D = m1p * wt - m1 * wtp;
    double scale = std::abs(m1p * wt) + std::abs(m1 * wtp);
    if (scale == 0.0) throw NumericError("coeff_A_denominator: zero scale");
    return {D / scale, 1e-3};
}

} // namespace ion
