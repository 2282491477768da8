#include "ion/wkb.hpp"

#include <algorithm>
#include <cmath>

#include "ion/quadrature.hpp"
#include "ion/series.hpp"
#include "ion/special.hpp"

namespace ion {

namespace {

double cml_real(int l, int m) {
    double num = 1.0;
    for (int j = l - m + 1; j <= l + m; ++j) num *= double(j);
    double den = 1.0;
    for (int j = 2; j <= m; ++j) den *= double(j);
    return num / den;
}

// Gauss-Legendre 4-point nodes/weights on [0,1].
const double gl4x[4] = {0.069431844202973712, 0.330009478207571868,
                        0.669990521792428132, 0.930568155797026288};
const double gl4w[4] = {0.173927422568726929, 0.326072577431273071,
                        0.326072577431273071, 0.173927422568726929};

// Gauss-Legendre 16-point on [-1,1] (shared with quadrature.cpp values).
const double gl16x[8] = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
const double gl16w[8] = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

template <typename F>
double gl16_panel(const F& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
    for (int j = 0; j < 8; ++j)
        s += gl16w[j] * (f(c - h * gl16x[j]) + f(c + h * gl16x[j]));
    return s * h;
}

std::vector<double> forcing_taylor_at_one(const ForcingProfile& f, std::size_t n) {
    // Series of Omega(1 - x) in powers of x.
    std::vector<double> c(n, 0.0);
    if (f.form == "const") {
        c[0] = f.amplitude;
    } else if (f.form == "affine_sq") {
        // A (1 + r)^2 at r = 1 - x: A (2 - x)^2
        c[0] = 4.0 * f.amplitude;
        if (n > 1) c[1] = -4.0 * f.amplitude;
        if (n > 2) c[2] = f.amplitude;
    } else {
        throw ValidationError("forcing_taylor_at_one: unknown form " + f.form);
    }
    return c;
}

} // namespace

double action_s(const ForcingProfile& forcing, double r) {
    if (r >= 1.0) return 0.0;
    if (r < 0.0) throw ValidationError("action_s: r must be >= 0");
    auto f = [&](double rho) -> Cplx {
        double om = forcing.value(rho);
        if (om <= 0.0) throw NumericError("action_s: non-positive forcing sample");
        return std::sqrt(om);
    };
    QuadOptions opt;
    opt.abs_tol = 1e-13;
    opt.rel_tol = 1e-13;
    return integrate_gk(f, r, 1.0, opt).value.real();
}

// --- frame ----------------------------------------------------------------

WKBFrame WKBFrame::make(const ForcingProfile& forcing, double omega, double b,
                        int l, int tau, int n0, double ip1) {
    if (tau != 0 && tau != 1) throw ValidationError("WKBFrame: tau in {0,1}");
    WKBFrame fr;
    fr.forcing = forcing;
    fr.omega = omega;
    fr.b = b;
    fr.l = l;
    fr.tau = tau;
    fr.n0 = n0;
    fr.ip1 = ip1;
    fr.Omega0 = forcing.value(0.0);
    fr.Omega0p = forcing.d1(0.0);
    const std::size_t N = 4001;
    fr.rg.resize(N);
    fr.s_tab.assign(N, 0.0);
    fr.e_tab.assign(N, 0.0);
    double h = 1.0 / double(N - 1);
    for (std::size_t j = 0; j < N; ++j) fr.rg[j] = double(j) * h;
    // cumulative from r = 1 downward, GL4 per cell
    for (std::size_t j = N - 1; j-- > 0;) {
        double a = fr.rg[j], bb = fr.rg[j + 1];
        double acc_s = 0.0, acc_e = 0.0;
        for (int g = 0; g < 4; ++g) {
            double rr = a + (bb - a) * gl4x[g];
            double som = std::sqrt(forcing.value(rr));
            acc_s += gl4w[g] * som;
        }
        fr.s_tab[j] = fr.s_tab[j + 1] + (bb - a) * acc_s;
        // e_tab needs s(r) at the Gauss nodes: second pass below
        (void)acc_e;
    }
    for (std::size_t j = N - 1; j-- > 0;) {
        double a = fr.rg[j], bb = fr.rg[j + 1];
        double acc = 0.0;
        for (int g = 0; g < 4; ++g) {
            double rr = a + (bb - a) * gl4x[g];
            // interpolate s at rr linearly between tabulated endpoints plus
            // exact derivative correction (Hermite)
            double t = (rr - a) / (bb - a);
            double s1 = fr.s_tab[j], s2 = fr.s_tab[j + 1];
            double d1 = -std::sqrt(forcing.value(a)), d2 = -std::sqrt(forcing.value(bb));
            double hh = bb - a;
            double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
            double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
            double sval = h00 * s1 + h10 * hh * d1 + h01 * s2 + h11 * hh * d2;
            acc += gl4w[g] * sval / std::sqrt(forcing.value(rr));
        }
        fr.e_tab[j] = fr.e_tab[j + 1] - (bb - a) * acc; // Int_1^r is negative of Int_r^1
    }
    fr.s0 = fr.s_tab[0];
    fr.alpha = 2.0 * std::sqrt(fr.Omega0) / fr.s0;
    return fr;
}

namespace {

double hermite_lookup(const std::vector<double>& xg, const std::vector<double>& yg,
                      const std::function<double(double)>& deriv, double x) {
    if (x <= xg.front()) return yg.front();
    if (x >= xg.back()) return yg.back();
    std::size_t j = std::size_t((x - xg.front()) / (xg[1] - xg[0]));
    j = std::min(j, xg.size() - 2);
    double a = xg[j], b = xg[j + 1], t = (x - a) / (b - a), hh = b - a;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * yg[j] + h10 * hh * deriv(a) + h01 * yg[j + 1] + h11 * hh * deriv(b);
}

} // namespace

double WKBFrame::s_of_r(double r) const {
    if (r >= 1.0) return 0.0;
    if (r <= 0.0) return s0;
    auto d = [this](double rr) { return -std::sqrt(forcing.value(rr)); };
    return hermite_lookup(rg, s_tab, d, r);
}

double WKBFrame::exp_integral(double r) const {
    if (r >= 1.0) return 0.0;
    if (r <= 0.0) return e_tab[0];
    auto d = [this](double rr) { return s_of_r(rr) / std::sqrt(forcing.value(rr)); };
    return hermite_lookup(rg, e_tab, d, r);
}

double WKBFrame::r_of_s(double s) const {
    if (s <= 0.0) return 1.0;
    if (s >= s0) return 0.0;
    // s_tab decreases in r; binary search then Newton
    std::size_t lo = 0, hi = rg.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        if (s_tab[mid] > s) lo = mid;
        else hi = mid;
    }
    double r = rg[lo];
    for (int it = 0; it < 60; ++it) {
        double f = s_of_r(r) - s;
        double d = -std::sqrt(forcing.value(std::min(r, 1.0)));
        double step = f / d;
        r -= step;
        r = std::clamp(r, 0.0, 1.0);
        if (std::abs(step) < 1e-15) break;
    }
    return r;
}

double WKBFrame::Qk(int k, double r) const {
    return b / r + double(k - n0) * omega + ip1 -
           double(l * (l + 1)) / (r * r);
}

// --- H0, G0 -----------------------------------------------------------------

double H0_fn(int l, double zeta) {
    double s = 0.0;
    for (int m = 0; m <= l; ++m) s += cml_real(l, m) * std::pow(2.0 * zeta, -m);
    return s;
}

double H0_d1(int l, double zeta) {
    double s = 0.0;
    for (int m = 1; m <= l; ++m)
        s += cml_real(l, m) * (-m) * std::pow(2.0 * zeta, -m - 1) * 2.0;
    return s;
}

double G0_fn(int l, double zeta) {
    Cplx v = std::exp(zeta) * zeta * sph_i(l, Cplx{zeta, 0.0});
    return v.real();
}

double G0_d1(int l, double zeta) {
    // d/dz [e^z z i_l(z)] = e^z [ z i_l + i_l + z i_l' ],
    // i_l' = i_{l-1} - (l+1)/z i_l  (i_{-1}(z) = cosh z / z)
    double il = sph_i(l, Cplx{zeta, 0.0}).real();
    double ilm1 = (l == 0) ? std::cosh(zeta) / zeta
                           : sph_i(l - 1, Cplx{zeta, 0.0}).real();
    double ild = ilm1 - double(l + 1) / zeta * il;
    return std::exp(zeta) * (zeta * il + il + zeta * ild);
}

// --- solve_H ------------------------------------------------------------------

namespace {

std::vector<double> make_zeta_grid(double zmax) {
    std::vector<double> z;
    double v = 1e-5;
    while (v < 0.1) {
        z.push_back(v);
        v *= 1.12;
    }
    auto uniform_to = [&](double hi, double h) {
        double start = z.back();
        int nseg = std::max(1, int(std::ceil((hi - start) / h)));
        double hh = (hi - start) / nseg;
        for (int j = 1; j <= nseg; ++j) z.push_back(start + hh * j);
    };
    if (zmax > 0.1) {
        uniform_to(std::min(4.0, zmax), 1.5e-3);
        if (zmax > 4.0) uniform_to(std::min(24.0, zmax), 4e-3);
        if (zmax > 24.0) uniform_to(zmax, 0.01);
    }
    return z;
}

} // namespace

HProfile solve_H(int k, const WKBFrame& fr) {
    if (k < 1) throw ValidationError("solve_H: k >= 1 required");
    double zmax = fr.alpha * k;
    if (zmax > 330.0) throw NumericError("solve_H: alpha k too large (overflow)");
    if (zmax < 0.6) throw NumericError("solve_H: alpha k too small");
    HProfile hp;
    hp.k = k;
    hp.l = fr.l;
    hp.alpha = fr.alpha;
    hp.zg = make_zeta_grid(zmax);
    const std::size_t N = hp.zg.size();
    const int l = fr.l;

    // R f = rcoef(zeta) f' - (b/(alpha zeta)) f
    double c0 = 2.0 * (-fr.omega / (2.0 * fr.alpha * fr.alpha) +
                       fr.Omega0p / (4.0 * fr.alpha * fr.Omega0) + 0.5 * fr.tau);
    double c1 = 2.0 * fr.Omega0p * 2.0 / (4.0 * fr.alpha * fr.Omega0); // the 2 zeta part
    auto rcoef = [&](double z) { return c0 + c1 * z; };

    // Precompute basis and quadrature node data.
    std::vector<double> H0g(N), H0pg(N), G0g(N), G0pg(N);
    for (std::size_t j = 0; j < N; ++j) {
        H0g[j] = H0_fn(l, hp.zg[j]);
        H0pg[j] = H0_d1(l, hp.zg[j]);
        G0g[j] = G0_fn(l, hp.zg[j]);
        G0pg[j] = G0_d1(l, hp.zg[j]);
    }
    struct QNode {
        double z, w, em2G0, em2H0, H0, H0p, G0, G0p;
        std::size_t cell;
    };
    std::vector<QNode> qn;
    qn.reserve(4 * N);
    for (std::size_t j = 0; j + 1 < N; ++j) {
        double a = hp.zg[j], b2 = hp.zg[j + 1];
        for (int g = 0; g < 4; ++g) {
            QNode n;
            n.z = a + (b2 - a) * gl4x[g];
            n.w = (b2 - a) * gl4w[g];
            n.H0 = H0_fn(l, n.z);
            n.H0p = H0_d1(l, n.z);
            n.G0 = G0_fn(l, n.z);
            n.G0p = G0_d1(l, n.z);
            n.em2G0 = std::exp(-2.0 * n.z) * n.G0;
            n.em2H0 = std::exp(-2.0 * n.z) * n.H0;
            n.cell = j;
            qn.push_back(n);
        }
    }

    std::vector<double> Hc(N, 0.0), Hcp(N, 0.0);
    std::vector<double> Hc_new(N), Hcp_new(N);
    auto interp_pair = [&](std::size_t cell, double z, double& v, double& d) {
        double a = hp.zg[cell], b2 = hp.zg[cell + 1], hh = b2 - a;
        double t = (z - a) / hh;
        double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        v = h00 * Hc[cell] + h10 * hh * Hcp[cell] + h01 * Hc[cell + 1] +
            h11 * hh * Hcp[cell + 1];
        // derivative of the Hermite form
        double g00 = (6 * t * t - 6 * t) / hh, g10 = (3 * t * t - 4 * t + 1);
        double g01 = (6 * t - 6 * t * t) / hh, g11 = (3 * t * t - 2 * t);
        d = g00 * Hc[cell] + g10 * Hcp[cell] + g01 * Hc[cell + 1] +
            g11 * Hcp[cell + 1];
    };

    double mix = 1.0;
    double prev_change = 1e300;
    for (int iter = 0; iter < 200; ++iter) {
        // S at quadrature nodes
        std::vector<double> SG0(qn.size()), SH0(qn.size());
        for (std::size_t i = 0; i < qn.size(); ++i) {
            const QNode& n = qn[i];
            double hc, hcp;
            interp_pair(n.cell, n.z, hc, hcp);
            double f = n.H0 + hc / k;
            double fp = n.H0p + hcp / k;
            double S = rcoef(n.z) * fp - fr.b * f / (fr.alpha * n.z);
            SG0[i] = n.em2G0 * S;
            SH0[i] = n.em2H0 * S;
        }
        // cumulative integrals on cells; the [0, zg[0]] sliver uses the
        // finite integrand limit (constant approximation, O(zmin^2) error)
        std::vector<double> A(N, 0.0), B(N, 0.0);
        {
            const QNode& n0 = qn[0];
            double hc, hcp;
            interp_pair(n0.cell, n0.z, hc, hcp);
            double f = n0.H0 + hc / k;
            double fpr = n0.H0p + hcp / k;
            double S0 = rcoef(n0.z) * fpr - fr.b * f / (fr.alpha * n0.z);
            A[0] = hp.zg[0] * n0.em2G0 * S0;
        }
        for (std::size_t j = 0; j + 1 < N; ++j) {
            double cell_int = 0.0;
            for (int g = 0; g < 4; ++g) cell_int += SG0[4 * j + g] * qn[4 * j + g].w;
            A[j + 1] = A[j] + cell_int;
        }
        for (std::size_t j = N - 1; j-- > 0;) {
            double cell_int = 0.0;
            for (int g = 0; g < 4; ++g) cell_int += SH0[4 * j + g] * qn[4 * j + g].w;
            B[j] = B[j + 1] - cell_int; // B(zeta) = Int_{k alpha}^zeta
        }
        double change = 0.0, scale = 1.0;
        for (std::size_t j = 0; j < N; ++j) {
            double v = -H0g[j] * A[j] + G0g[j] * B[j];
            double d = -H0pg[j] * A[j] + G0pg[j] * B[j];
            Hc_new[j] = (1.0 - mix) * Hc[j] + mix * v;
            Hcp_new[j] = (1.0 - mix) * Hcp[j] + mix * d;
            change = std::max(change, std::abs(Hc_new[j] - Hc[j]));
            scale = std::max(scale, std::abs(Hc_new[j]));
        }
        Hc.swap(Hc_new);
        Hcp.swap(Hcp_new);
        hp.iterations = iter + 1;
        if (change < 1e-11 * scale) break;
        if (change > 4.0 * prev_change)
            throw NumericError("solve_H: Picard iteration diverging at k=" +
                               std::to_string(k));
        if (change > 0.8 * prev_change) mix = 0.6; // damp marginal contraction
        prev_change = change;
        if (iter == 199)
            throw NumericError("solve_H: no convergence in 200 iterations");
    }
    hp.Hck = Hc;
    hp.H.resize(N);
    hp.Hp.resize(N);
    hp.Hpp.resize(N);
    for (std::size_t j = 0; j < N; ++j) {
        hp.H[j] = H0g[j] + Hc[j] / k;
        hp.Hp[j] = H0pg[j] + Hcp[j] / k;
        if (hp.H[j] <= 0.0)
            throw NumericError("solve_H: H has a zero on the grid (k too small)");
    }
    // nodal second derivatives from the differential equation itself
    for (std::size_t j = 0; j < N; ++j) {
        double z = hp.zg[j], kk = double(k);
        double coef = 2.0 * (1.0 - fr.omega / (2.0 * kk * fr.alpha * fr.alpha) +
                             fr.Omega0p * (1.0 + 2.0 * z) /
                                 (4.0 * kk * fr.alpha * fr.Omega0) +
                             fr.tau / (2.0 * kk));
        double vc = double(fr.l * (fr.l + 1)) / (z * z) - fr.b / (fr.alpha * z * kk);
        hp.Hpp[j] = coef * hp.Hp[j] + vc * hp.H[j];
    }
    hp.H_end = hp.H.back();
    return hp;
}

namespace {

std::size_t locate(const std::vector<double>& xs, double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t j = (it == xs.begin()) ? 0 : std::size_t(it - xs.begin() - 1);
    return std::min(j, xs.size() - 2);
}

double hermite_cell(double a, double b, double y1, double d1, double y2,
                    double d2, double x) {
    double hh = b - a, t = (x - a) / hh;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * y1 + h10 * hh * d1 + h01 * y2 + h11 * hh * d2;
}

double hermite_cell_d(double a, double b, double y1, double d1, double y2,
                      double d2, double x) {
    double hh = b - a, t = (x - a) / hh;
    double g00 = (6 * t * t - 6 * t) / hh, g10 = (3 * t * t - 4 * t + 1);
    double g01 = (6 * t - 6 * t * t) / hh, g11 = (3 * t * t - 2 * t);
    return g00 * y1 + g10 * d1 + g01 * y2 + g11 * d2;
}

} // namespace

namespace {

// Two-point quintic Hermite from values, first and second derivatives.
double quintic_cell(double a, double b, double y0, double d0, double s0,
                    double y1, double d1, double s1, double x, bool deriv) {
    double h = b - a, t = (x - a) / h;
    double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    if (!deriv) {
        double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
        double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
        double h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
        double h3 = 10 * t3 - 15 * t4 + 6 * t5;
        double h4 = -4 * t3 + 7 * t4 - 3 * t5;
        double h5 = 0.5 * (t3 - 2 * t4 + t5);
        return y0 * h0 + d0 * h * h1 + s0 * h * h * h2 + y1 * h3 + d1 * h * h4 +
               s1 * h * h * h5;
    }
    double g0 = -30 * t2 + 60 * t3 - 30 * t4;
    double g1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
    double g2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4);
    double g3 = 30 * t2 - 60 * t3 + 30 * t4;
    double g4 = -12 * t2 + 28 * t3 - 15 * t4;
    double g5 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4);
    return (y0 * g0 + y1 * g3) / h + d0 * g1 + d1 * g4 + s0 * h * g2 + s1 * h * g5;
}

} // namespace

double HProfile::at(double zeta) const {
    if (zeta <= zg.front()) return H.front();
    if (zeta >= zg.back()) return H.back();
    std::size_t j = locate(zg, zeta);
    return quintic_cell(zg[j], zg[j + 1], H[j], Hp[j], Hpp[j], H[j + 1],
                        Hp[j + 1], Hpp[j + 1], zeta, false);
}

double HProfile::d1(double zeta) const {
    if (zeta <= zg.front()) return Hp.front();
    if (zeta >= zg.back()) return Hp.back();
    std::size_t j = locate(zg, zeta);
    return quintic_cell(zg[j], zg[j + 1], H[j], Hp[j], Hpp[j], H[j + 1],
                        Hp[j + 1], Hpp[j + 1], zeta, true);
}

double HProfile::d2(double zeta, const WKBFrame& fr) const {
    double h = at(zeta), hd = d1(zeta);
    double kk = double(k);
    double coef = 2.0 * (1.0 - fr.omega / (2.0 * kk * fr.alpha * fr.alpha) +
                         fr.Omega0p * (1.0 + 2.0 * zeta) /
                             (4.0 * kk * fr.alpha * fr.Omega0) +
                         fr.tau / (2.0 * kk));
    double vc = double(l * (l + 1)) / (zeta * zeta) -
                fr.b / (fr.alpha * zeta * kk);
    return coef * hd + vc * h;
}

double HProfile::hcheck_at(double zeta) const {
    if (zeta <= zg.front()) return Hck.front();
    if (zeta >= zg.back()) return Hck.back();
    std::size_t j = locate(zg, zeta);
    double t = (zeta - zg[j]) / (zg[j + 1] - zg[j]);
    return (1.0 - t) * Hck[j] + t * Hck[j + 1];
}

// --- m_k ---------------------------------------------------------------------

MkProfile make_mk(int k, const WKBFrame& frame, std::shared_ptr<HProfile> hk) {
    MkProfile m;
    m.k = k;
    m.frame = &frame;
    m.hk = std::move(hk);
    return m;
}

double MkProfile::log_Fk(double r) const {
    const WKBFrame& fr = *frame;
    double om1 = fr.forcing.value(1.0), omr = fr.forcing.value(r);
    double hz = hk->at(fr.zeta(k, r));
    return 0.25 * (std::log(om1) - std::log(omr)) + std::log(hz) -
           std::log(hk->H_end) + 0.25 * fr.omega * fr.exp_integral(r);
}

double MkProfile::log_mk(double r) const {
    const WKBFrame& fr = *frame;
    double s = fr.s_of_r(r);
    if (s <= 0.0) return -1e300;
    return double(2 * k + fr.tau) * std::log(s) -
           std::lgamma(double(2 * k + fr.tau + 1)) + log_Fk(r);
}

double MkProfile::mk(double r) const {
    double lm = log_mk(r);
    if (lm < -700.0) return 0.0;
    return std::exp(lm);
}

// --- j_k ----------------------------------------------------------------------

namespace {

double jk_value(int k, double r, const WKBFrame& fr, const HProfile& Hk,
                const HProfile& Hkm1) {
    double s = fr.s_of_r(r);
    double om = fr.forcing.value(r), omp = fr.forcing.d1(r), omq = fr.forcing.d2(r);
    double al = fr.alpha;
    double z = fr.zeta(k, r);
    double H = Hk.at(z), Hd = Hk.d1(z), Hdd = Hk.d2(z, fr);
    // ratio H(alpha k) H(zeta - zeta/k) / (H(alpha (k-1)) H(zeta)); the shifted
    // argument zeta (1 - 1/k) = alpha (k-1) r belongs to the (k-1)-profile.
    double ratio = Hk.H_end * Hkm1.at(z - z / k) / (Hkm1.H_end * H);
    int l = fr.l, tau = fr.tau;
    double j2 = 4.0 * om / (al * al * s * s) * (1.0 - ratio) + Hdd / H -
                double(l * (l + 1)) / (z * z) - 4.0 * std::sqrt(om) * Hd / (al * s * H);
    double j1 = -2.0 * (1.0 - 2.0 * tau) * om / (al * al * s * s) * (1.0 - ratio) +
                fr.b / (al * z) +
                (-2.0 * tau * std::sqrt(om) / (al * s) +
                 fr.omega * s / (2.0 * std::sqrt(om) * al) - omp / (2.0 * al * om)) *
                    Hd / H;
    double j0 = 5.0 * s * omp * omp / (16.0 * om * om) -
                fr.omega * s * s * omp / (4.0 * std::pow(om, 1.5)) -
                s * omq / (4.0 * om) - 0.25 * (1.0 + 2.0 * tau) * fr.omega * s +
                fr.omega * fr.omega * s * s * s / (16.0 * om) -
                (fr.omega * fr.n0 - fr.ip1) * s;
    return double(k) * double(k) * al * al * s * j2 + double(k) * al * al * s * j1 + j0;
}

} // namespace

JkValue j_k_eval(int k, double r, const WKBFrame& frame, const HProfile& Hk,
                 const HProfile& Hkm1) {
    if (r <= 0.0 || r > 1.0) throw ValidationError("j_k_eval: r in (0,1]");
    JkValue out;
    out.value = jk_value(k, r, frame, Hk, Hkm1);
    double dr = std::max(1e-6, 1e-4 * r);
    double rp = std::min(r + dr, 1.0 - 1e-12), rm = std::max(r - dr, 1e-9);
    out.deriv = (jk_value(k, rp, frame, Hk, Hkm1) -
                 jk_value(k, rm, frame, Hk, Hkm1)) /
                (rp - rm);
    return out;
}

// --- basis_green -----------------------------------------------------------------

BasisGreen basis_green(int k, const WKBFrame& fr, double r_min) {
    BasisGreen bg;
    bg.k = k;
    const double h_out = 5e-4;
    std::size_t n = std::size_t(std::ceil((1.0 - r_min) / h_out)) + 1;
    bg.rg.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        bg.rg[j] = 1.0 - double(n - 1 - j) * (1.0 - r_min) / double(n - 1);
    bg.p1.assign(n, 0.0);
    bg.p1d.assign(n, 0.0);
    bg.p2.assign(n, 0.0);
    bg.p2d.assign(n, 0.0);
    double y1 = 1.0, y1d = 0.0, y2 = 0.0, y2d = 1.0;
    bg.p1[n - 1] = y1;
    bg.p1d[n - 1] = y1d;
    bg.p2[n - 1] = y2;
    bg.p2d[n - 1] = y2d;
    auto acc = [&](double r, double v) { return -fr.Qk(k, r) * v; };
    double wdrift = 0.0;
    for (std::size_t j = n - 1; j-- > 0;) {
        double r0 = bg.rg[j + 1], r1 = bg.rg[j];
        // integrate from r0 down to r1 with substeps
        double r = r0;
        while (r > r1 + 1e-15) {
            double hmax = std::min(r - r1, std::min(5e-4, r / 40.0));
            double hstep = -hmax;
            // RK4 for (y1, y1d) and (y2, y2d)
            auto rk4 = [&](double& y, double& yd) {
                double k1 = yd, k1d = acc(r, y);
                double k2 = yd + 0.5 * hstep * k1d, k2d = acc(r + 0.5 * hstep, y + 0.5 * hstep * k1);
                double k3 = yd + 0.5 * hstep * k2d, k3d = acc(r + 0.5 * hstep, y + 0.5 * hstep * k2);
                double k4 = yd + hstep * k3d, k4d = acc(r + hstep, y + hstep * k3);
                y += hstep / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
                yd += hstep / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
            };
            rk4(y1, y1d);
            rk4(y2, y2d);
            r += hstep;
        }
        bg.p1[j] = y1;
        bg.p1d[j] = y1d;
        bg.p2[j] = y2;
        bg.p2d[j] = y2d;
        wdrift = std::max(wdrift, std::abs(y1 * y2d - y2 * y1d - 1.0));
    }
    bg.wronskian_drift = wdrift;
    if (wdrift > 1e-6)
        throw NumericError("basis_green: Wronskian drift " + std::to_string(wdrift));
    return bg;
}

namespace {

double interp_pair_at(const std::vector<double>& xg, const std::vector<double>& y,
                      const std::vector<double>& yd, double x) {
    if (x <= xg.front()) {
        std::size_t j = 0;
        return hermite_cell(xg[j], xg[j + 1], y[j], yd[j], y[j + 1], yd[j + 1], x);
    }
    if (x >= xg.back()) return y.back();
    std::size_t j = locate(xg, x);
    return hermite_cell(xg[j], xg[j + 1], y[j], yd[j], y[j + 1], yd[j + 1], x);
}

double interp_pair_deriv(const std::vector<double>& xg, const std::vector<double>& y,
                         const std::vector<double>& yd, double x) {
    if (x >= xg.back()) return yd.back();
    std::size_t j = (x <= xg.front()) ? 0 : locate(xg, x);
    return hermite_cell_d(xg[j], xg[j + 1], y[j], yd[j], y[j + 1], yd[j + 1], x);
}

} // namespace

double BasisGreen::psi1(double r) const { return interp_pair_at(rg, p1, p1d, r); }
double BasisGreen::psi2(double r) const { return interp_pair_at(rg, p2, p2d, r); }
double BasisGreen::psi1d(double r) const { return interp_pair_deriv(rg, p1, p1d, r); }
double BasisGreen::psi2d(double r) const { return interp_pair_deriv(rg, p2, p2d, r); }

double BasisGreen::G(double r, double s) const {
    return psi1(r) * psi2(s) - psi2(r) * psi1(s);
}

double BasisGreen::dGdr(double r, double s) const {
    return psi1d(r) * psi2(s) - psi2d(r) * psi1(s);
}

// --- chain_solve ------------------------------------------------------------------

ChainResult chain_solve(int K_max, const WKBFrame& fr, double r_min,
                        double series_frac, int series_pad) {
    const int M = 2 * K_max + series_pad; // series order (inclusive)
    const std::size_t W = std::size_t(M) + 1;
    using series::S;
    // Omega(1-x) and derived series in x
    S om_x = forcing_taylor_at_one(fr.forcing, W);
    S sq = series::pow(om_x, 0.5, W);
    S s_x = series::integ(sq); // s as series in x, s(0)=0
    s_x.resize(W, 0.0);
    S x_s = series::revert(s_x, W); // x as series in s
    // r(s) = 1 - x(s); compose helpers
    auto comp = [&](const S& f_in_x) { return series::compose(f_in_x, x_s, W); };
    // 1/r = 1/(1-x), 1/r^2
    S one_minus(W, 0.0);
    one_minus[0] = 1.0;
    if (W > 1) one_minus[1] = -1.0;
    S inv_r_x = series::recip(one_minus, W);
    S inv_r2_x = series::mul(inv_r_x, inv_r_x, W);
    S om_s = comp(om_x);
    S inv_om_s = series::recip(om_s, W);
    S inv_r_s = comp(inv_r_x);
    S inv_r2_s = comp(inv_r2_x);
    // P1 = Omega'(r) / (2 Omega^{3/2}) with d/dr = -(1/sqrt(Omega)) ... easier:
    // note Omega'(r) = -dOmega/dx; build dOmega/dx then compose.
    S dom_x = series::diff(om_x);
    dom_x.resize(W, 0.0);
    S dom_s = comp(dom_x);
    S om32_s = series::pow(om_s, 1.5, W);
    S P1 = series::mul(series::scal(-0.5, dom_s), series::recip(om32_s, W), W);
    // P0_k = (b/r + (k - n0) w + ip1 - l(l+1)/r^2)/Omega = base + k * (w/Omega)
    S base = series::add(series::scal(fr.b, inv_r_s),
                         series::scal(-double(fr.l * (fr.l + 1)), inv_r2_s));
    base.resize(W, 0.0);
    base[0] += -double(fr.n0) * fr.omega + fr.ip1;
    S baseP0 = series::mul(base, inv_om_s, W);
    S wOm = series::scal(fr.omega, inv_om_s);

    // coefficient recursion: G_k'' - P1 G_k' + P0_k G_k = G_{k-1} + G_{k+1}
    std::vector<S> c(K_max + 1, S(W, 0.0));
    if (fr.tau == 0) c[0][0] = 1.0;
    else if (W > 1) c[0][1] = 1.0;
    for (int m = 0; m + 2 <= M; ++m) {
        for (int k = 0; k <= K_max; ++k) {
            // (P1 G')_m
            double p1g = 0.0;
            for (int j = 0; j <= m; ++j)
                p1g += P1[j] * double(m - j + 1) * c[k][m - j + 1];
            // (P0_k G)_m with P0_k = baseP0 + k wOm
            double p0g = 0.0;
            for (int j = 0; j <= m; ++j)
                p0g += (baseP0[j] + double(k) * wOm[j]) * c[k][m - j];
            double src = 0.0;
            if (k > 0) src += c[k - 1][m];
            if (k + 1 <= K_max) src += c[k + 1][m];
            c[k][m + 2] = (p1g - p0g + src) / (double(m + 1) * double(m + 2));
        }
    }

    ChainResult out;
    out.K_max = K_max;
    out.tau = fr.tau;
    out.frame = &fr;
    out.series = c;
    out.s_series = series_frac * fr.s0;
    out.r_series = fr.r_of_s(out.s_series);

    // RK4 phase from r_series down to r_min
    const double h = 5e-4;
    std::size_t n = std::size_t(std::ceil((out.r_series - r_min) / h)) + 1;
    out.rg.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        out.rg[j] = r_min + double(j) * (out.r_series - r_min) / double(n - 1);
    out.G.assign(K_max + 1, std::vector<double>(n, 0.0));
    out.Gp.assign(K_max + 1, std::vector<double>(n, 0.0));

    std::vector<double> y(K_max + 1), yd(K_max + 1);
    double ssr = out.s_series;
    double sq1 = std::sqrt(fr.forcing.value(out.r_series));
    for (int k = 0; k <= K_max; ++k) {
        double gs = series::eval(c[k], ssr);
        S dc = series::diff(c[k]);
        double dgs = series::eval(dc, ssr);
        y[k] = gs;
        yd[k] = -sq1 * dgs; // dG/dr = -sqrt(Omega) dG/ds
    }
    for (int k = 0; k <= K_max; ++k) {
        out.G[k][n - 1] = y[k];
        out.Gp[k][n - 1] = yd[k];
    }
    auto deriv = [&](double r, const std::vector<double>& yy,
                     const std::vector<double>& yyd, std::vector<double>& fy,
                     std::vector<double>& fyd) {
        double om = fr.forcing.value(r);
        for (int k = 0; k <= K_max; ++k) {
            fy[k] = yyd[k];
            double src = 0.0;
            if (k > 0) src += yy[k - 1];
            if (k + 1 <= K_max) src += yy[k + 1];
            fyd[k] = -fr.Qk(k, r) * yy[k] + om * src;
        }
    };
    std::vector<double> k1(K_max + 1), k1d(K_max + 1), k2(K_max + 1), k2d(K_max + 1),
        k3(K_max + 1), k3d(K_max + 1), k4(K_max + 1), k4d(K_max + 1),
        ty(K_max + 1), tyd(K_max + 1);
    for (std::size_t j = n - 1; j-- > 0;) {
        double r0 = out.rg[j + 1], r1 = out.rg[j];
        double r = r0;
        while (r > r1 + 1e-15) {
            double hs = -std::min(r - r1, std::min(5e-4, r / 50.0 + 1e-4));
            deriv(r, y, yd, k1, k1d);
            for (int k = 0; k <= K_max; ++k) {
                ty[k] = y[k] + 0.5 * hs * k1[k];
                tyd[k] = yd[k] + 0.5 * hs * k1d[k];
            }
            deriv(r + 0.5 * hs, ty, tyd, k2, k2d);
            for (int k = 0; k <= K_max; ++k) {
                ty[k] = y[k] + 0.5 * hs * k2[k];
                tyd[k] = yd[k] + 0.5 * hs * k2d[k];
            }
            deriv(r + 0.5 * hs, ty, tyd, k3, k3d);
            for (int k = 0; k <= K_max; ++k) {
                ty[k] = y[k] + hs * k3[k];
                tyd[k] = yd[k] + hs * k3d[k];
            }
            deriv(r + hs, ty, tyd, k4, k4d);
            for (int k = 0; k <= K_max; ++k) {
                y[k] += hs / 6.0 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
                yd[k] += hs / 6.0 * (k1d[k] + 2 * k2d[k] + 2 * k3d[k] + k4d[k]);
            }
            r += hs;
        }
        for (int k = 0; k <= K_max; ++k) {
            out.G[k][j] = y[k];
            out.Gp[k][j] = yd[k];
        }
    }
    return out;
}

ChainResult chain_solve_direct(int K_max, const WKBFrame& fr, double r_lo) {
    ChainResult out;
    out.K_max = K_max;
    out.tau = fr.tau;
    out.frame = &fr;
    out.r_series = 1.0 + 1e-9; // everything comes from the grid
    out.s_series = 0.0;
    const double h = 2.5e-4;
    std::size_t n = std::size_t(std::ceil((1.0 - r_lo) / h)) + 1;
    out.rg.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        out.rg[j] = r_lo + double(j) * (1.0 - r_lo) / double(n - 1);
    out.G.assign(K_max + 1, std::vector<double>(n, 0.0));
    out.Gp.assign(K_max + 1, std::vector<double>(n, 0.0));
    // G_0 = g_{n0}: case (i) g(1) = 1; case (ii) g(1) = 0, g'(1) = -sqrt(Omega(1)).
    std::vector<double> y(K_max + 1, 0.0), yd(K_max + 1, 0.0);
    if (fr.tau == 0) y[0] = 1.0;
    else yd[0] = -std::sqrt(fr.forcing.value(1.0));
    for (int k = 0; k <= K_max; ++k) {
        out.G[k][n - 1] = y[k];
        out.Gp[k][n - 1] = yd[k];
    }
    auto deriv = [&](double r, const std::vector<double>& yy,
                     const std::vector<double>& yyd, std::vector<double>& fy,
                     std::vector<double>& fyd) {
        double om = fr.forcing.value(r);
        for (int k = 0; k <= K_max; ++k) {
            fy[k] = yyd[k];
            double src = 0.0;
            if (k > 0) src += yy[k - 1];
            if (k + 1 <= K_max) src += yy[k + 1];
            fyd[k] = -fr.Qk(k, r) * yy[k] + om * src;
        }
    };
    std::vector<double> k1(K_max + 1), k1d(K_max + 1), k2(K_max + 1), k2d(K_max + 1),
        k3(K_max + 1), k3d(K_max + 1), k4(K_max + 1), k4d(K_max + 1),
        ty(K_max + 1), tyd(K_max + 1);
    for (std::size_t j = n - 1; j-- > 0;) {
        double r0 = out.rg[j + 1], r1 = out.rg[j];
        double r = r0;
        while (r > r1 + 1e-15) {
            double hs = -std::min(r - r1, std::min(h, r / 50.0 + 1e-5));
            deriv(r, y, yd, k1, k1d);
            for (int k = 0; k <= K_max; ++k) {
                ty[k] = y[k] + 0.5 * hs * k1[k];
                tyd[k] = yd[k] + 0.5 * hs * k1d[k];
            }
            deriv(r + 0.5 * hs, ty, tyd, k2, k2d);
            for (int k = 0; k <= K_max; ++k) {
                ty[k] = y[k] + 0.5 * hs * k2[k];
                tyd[k] = yd[k] + 0.5 * hs * k2d[k];
            }
            deriv(r + 0.5 * hs, ty, tyd, k3, k3d);
            for (int k = 0; k <= K_max; ++k) {
                ty[k] = y[k] + hs * k3[k];
                tyd[k] = yd[k] + hs * k3d[k];
            }
            deriv(r + hs, ty, tyd, k4, k4d);
            for (int k = 0; k <= K_max; ++k) {
                y[k] += hs / 6.0 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
                yd[k] += hs / 6.0 * (k1d[k] + 2 * k2d[k] + 2 * k3d[k] + k4d[k]);
            }
            r += hs;
        }
        for (int k = 0; k <= K_max; ++k) {
            out.G[k][j] = y[k];
            out.Gp[k][j] = yd[k];
        }
    }
    return out;
}

double ChainResult::h1(int k) const {
    int idx = 2 * k + tau;
    if (idx >= int(series[k].size())) throw ValidationError("ChainResult::h1: order");
    double c = series[k][idx];
    if (c == 0.0) return 0.0;
    double lg = std::lgamma(double(idx + 1));
    return (c > 0 ? 1.0 : -1.0) * std::exp(std::log(std::abs(c)) + lg);
}

double ChainResult::eval(int k, double r) const {
    if (r >= r_series) {
        if (!series[k].empty() && frame) {
            double s = frame->s_of_r(r);
            return series::eval(series[k], s);
        }
        r = r_series; // direct chains carry no series; clamp to the last node
    }
    if (r <= rg.front()) return G[k].front();
    std::size_t j = locate(rg, r);
    return hermite_cell(rg[j], rg[j + 1], G[k][j], Gp[k][j], G[k][j + 1],
                        Gp[k][j + 1], r);
}

double ChainResult::eval_d(int k, double r) const {
    if (r >= r_series) {
        if (!series[k].empty() && frame) {
            double s = frame->s_of_r(r);
            series::S dc = series::diff(series[k]);
            return -std::sqrt(frame->forcing.value(r)) * series::eval(dc, s);
        }
        return Gp[k].back();
    }
    if (r <= rg.front()) return Gp[k].front();
    std::size_t j = locate(rg, r);
    return hermite_cell_d(rg[j], rg[j + 1], G[k][j], Gp[k][j], G[k][j + 1],
                          Gp[k][j + 1], r);
}

std::vector<double> h_k_extract(const ChainResult& chain, const MkProfile& mk,
                                const std::vector<double>& r_pts, int k) {
    std::vector<double> h(r_pts.size());
    for (std::size_t i = 0; i < r_pts.size(); ++i) {
        double g = chain.eval(k, r_pts[i]);
        double lm = mk.log_mk(r_pts[i]);
        if (lm < -650.0)
            throw NumericError("h_k_extract: m_k underflow at r=" +
                               std::to_string(r_pts[i]));
        double m = std::exp(lm);
        if (m == 0.0) throw NumericError("h_k_extract: division breakdown");
        h[i] = g / m;
    }
    return h;
}

// --- A_k, H_k operators --------------------------------------------------------

AkHkOps make_ops(int k, const WKBFrame& frame) {
    if (k < 2) throw ValidationError("make_ops: k >= 2");
    AkHkOps ops;
    ops.k = k;
    ops.frame = &frame;
    auto hk = std::make_shared<HProfile>(solve_H(k, frame));
    auto hkm1 = std::make_shared<HProfile>(solve_H(k - 1, frame));
    auto hkp1 = std::make_shared<HProfile>(solve_H(k + 1, frame));
    ops.mk = make_mk(k, frame, hk);
    ops.mkm1 = make_mk(k - 1, frame, hkm1);
    ops.mkp1 = make_mk(k + 1, frame, hkp1);
    ops.green = std::make_shared<BasisGreen>(basis_green(k, frame, 1e-4));
    return ops;
}

namespace {

// Int_r^1 Omega(s) exp(log m_src(s) - log m_dst(r)) G_k(r, s) f(s) ds,
// computed in the t = s(s)/s(r) variable away from the origin and in the
// eta = alpha k s variable for the near-diagonal part when r is small.
double kernel_integral(const AkHkOps& ops, const MkProfile& src, double r,
                       const std::function<double(double)>& f) {
    const WKBFrame& fr = *ops.frame;
    int k = ops.k;
    double lmr = ops.mk.log_mk(r);
    double sr = fr.s_of_r(r);
    double r_hat = ops.C2 * std::log(double(k)) / double(k);
    auto integrand_s = [&](double s) -> double {
        if (s >= 1.0) return 0.0;
        double dl = src.log_mk(s) - lmr;
        if (dl < -50.0) return 0.0;
        return fr.forcing.value(s) * std::exp(dl) * ops.green->G(r, s) * f(s);
    };
    double total = 0.0;
    if (r >= r_hat) {
        // t-substitution over the whole range: s = r_of_s(t s(r)),
        // ds = s(r) dt / sqrt(Omega(s)).
        auto g = [&](double t) -> double {
            double s = fr.r_of_s(t * sr);
            return integrand_s(s) * sr / std::sqrt(fr.forcing.value(s));
        };
        double w = std::min(1.0, 6.0 / double(2 * k + fr.tau));
        double hi = 1.0, tfloor = 1e-3;
        while (hi > tfloor) {
            double lo = std::max(hi - w, 0.0);
            total += gl16_panel(g, lo, hi);
            // once t^{2k} is negligible, stop
            if (double(2 * k + fr.tau - 2) * std::log(std::max(lo, 1e-12)) < -45.0)
                break;
            hi = lo;
            w *= 2.0;
        }
        return total;
    }
    // near-origin: eta variable on [zeta, alpha k r_cut], then t-form remainder
    double zr = fr.zeta(k, r);
    double r_cut = std::min(1.0, 4.0 * r_hat);
    double zcut = fr.zeta(k, r_cut);
    auto geta = [&](double eta) -> double {
        double s = eta / (fr.alpha * k);
        return integrand_s(s) / (fr.alpha * k);
    };
    double lo = zr;
    double w = 2.0;
    while (lo < zcut) {
        double hi = std::min(lo + w, zcut);
        total += gl16_panel(geta, lo, hi);
        lo = hi;
        w *= 1.5;
    }
    // remainder in t
    double t_hi = fr.s_of_r(r_cut) / sr;
    auto g = [&](double t) -> double {
        double s = fr.r_of_s(t * sr);
        return integrand_s(s) * sr / std::sqrt(fr.forcing.value(s));
    };
    double w2 = std::min(0.5, 6.0 / double(2 * k + fr.tau));
    double hi2 = t_hi;
    while (hi2 > 1e-3) {
        double lo2 = std::max(hi2 - w2, 0.0);
        total += gl16_panel(g, lo2, hi2);
        if (double(2 * k + fr.tau - 2) * std::log(std::max(lo2, 1e-12)) +
                (src.log_mk(fr.r_of_s(hi2 * sr)) - src.log_mk(fr.r_of_s(std::min(t_hi, 1.0) * sr))) <
            -45.0)
            break;
        hi2 = lo2;
        w2 *= 2.0;
    }
    return total;
}

} // namespace

double AkHkOps::apply_A(const std::function<double(double)>& f, double r) const {
    return kernel_integral(*this, mkm1, r, f);
}

double AkHkOps::apply_H(const std::function<double(double)>& f, double r) const {
    return kernel_integral(*this, mkp1, r, f);
}

// --- Lemma 46 identities -----------------------------------------------------------

G0Identity g0_identity(double zeta, int l) {
    if (zeta <= 0.0) throw ValidationError("g0_identity: zeta > 0");
    double h0 = H0_fn(l, zeta);
    double h0d = H0_d1(l, zeta);
    auto G0k = [&](double eta) {
        return (std::pow(eta, l + 1) * std::pow(zeta, -l) -
                std::pow(zeta, l + 1) * std::pow(eta, -l)) /
               double(2 * l + 1);
    };
    auto G0kz = [&](double eta) {
        return (-double(l) * std::pow(eta, l + 1) * std::pow(zeta, -l - 1) -
                double(l + 1) * std::pow(zeta, l) * std::pow(eta, -l)) /
               double(2 * l + 1);
    };
    QuadOptions opt;
    opt.abs_tol = 1e-12;
    opt.rel_tol = 1e-12;
    double hi = zeta + 60.0 + 10.0 * l;
    auto f1 = [&](double eta) -> Cplx {
        return std::exp(-eta + zeta) * G0k(eta) * H0_fn(l, eta) / h0;
    };
    auto f2 = [&](double eta) -> Cplx {
        return std::exp(-eta + zeta) * G0kz(eta) * H0_fn(l, eta) / h0;
    };
    G0Identity out;
    out.I1 = integrate_gk(f1, zeta, hi, opt).value.real();
    out.I2 = integrate_gk(f2, zeta, hi, opt).value.real();
    return out;
}

// --- Fornberg weights ---------------------------------------------------------------

std::vector<double> fd_weights(double x0, const std::vector<double>& xs, int m) {
    const int n = int(xs.size()) - 1;
    std::vector<std::vector<std::vector<double>>> d(
        n + 1, std::vector<std::vector<double>>(n + 1, std::vector<double>(m + 1, 0.0)));
    d[0][0][0] = 1.0;
    double c1 = 1.0;
    for (int i = 1; i <= n; ++i) {
        double c2 = 1.0;
        for (int j = 0; j < i; ++j) {
            double c3 = xs[i] - xs[j];
            c2 *= c3;
            for (int kk = 0; kk <= std::min(i, m); ++kk) {
                d[i][j][kk] =
                    ((xs[i] - x0) * d[i - 1][j][kk] -
                     (kk > 0 ? double(kk) * d[i - 1][j][kk - 1] : 0.0)) /
                    c3;
            }
        }
        for (int kk = 0; kk <= std::min(i, m); ++kk) {
            d[i][i][kk] = c1 / c2 *
                          ((kk > 0 ? double(kk) * d[i - 1][i - 1][kk - 1] : 0.0) -
                           (xs[i - 1] - x0) * d[i - 1][i - 1][kk]);
        }
        c1 = c2;
    }
    std::vector<double> w(n + 1);
    for (int j = 0; j <= n; ++j) w[j] = d[n][j][m];
    return w;
}

} // namespace ion
