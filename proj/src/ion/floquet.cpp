#include "ion/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <random>

#include "ion/green.hpp"
#include "ion/log.hpp"
#include "ion/threadpool.hpp"

namespace ion {

double beta_schedule(Cplx p, const RegularizationParams& rp) {
    if (p.real() >= 0.0 && p.imag() >= -rp.eps && p.imag() <= rp.p_c) return rp.c;
    return 0.0;
}

SidebandField SidebandField::zeros(int n_min, int n_max, std::size_t n_radial) {
    SidebandField f;
    f.n_min = n_min;
    f.n_max = n_max;
    f.y.assign(n_max - n_min + 1, std::vector<Cplx>(n_radial, Cplx{0.0, 0.0}));
    return f;
}

double SidebandField::weighted_norm2(const RadialGrid& grid) const {
    double s = 0.0;
    for (int k = 0; k < count(); ++k) {
        double wn = std::pow(1.0 + std::abs(n_min + k), 4.0 / 3.0);
        s += wn * grid.dot_norm2(y[k]);
    }
    return s;
}

// --- tridiagonal -----------------------------------------------------------

void TriFactor::factor() {
    std::size_t n = diag.size();
    dhat.resize(n);
    chat.resize(n);
    double minp = 1e300, maxp = 0.0;
    Cplx d = diag[0];
    dhat[0] = d;
    chat[0] = sup[0] / d;
    for (std::size_t j = 1; j < n; ++j) {
        d = diag[j] - sub[j] * chat[j - 1];
        dhat[j] = d;
        chat[j] = (j + 1 < n) ? sup[j] / d : Cplx{0.0, 0.0};
        minp = std::min(minp, std::abs(d));
        maxp = std::max(maxp, std::abs(d));
    }
    minp = std::min(minp, std::abs(dhat[0]));
    maxp = std::max(maxp, std::abs(dhat[0]));
    min_pivot_ratio = (maxp > 0.0) ? minp / maxp : 0.0;
    if (minp == 0.0) throw NumericError("TriFactor: singular matrix");
}

std::vector<Cplx> TriFactor::solve(const std::vector<Cplx>& rhs) const {
    std::size_t n = diag.size();
    std::vector<Cplx> x(n);
    x[0] = rhs[0] / dhat[0];
    for (std::size_t j = 1; j < n; ++j)
        x[j] = (rhs[j] - sub[j] * x[j - 1]) / dhat[j];
    for (std::size_t j = n - 1; j-- > 0;) x[j] -= chat[j] * x[j + 1];
    return x;
}

std::vector<Cplx> TriFactor::solve_adjoint(const std::vector<Cplx>& rhs) const {
    // Solve A^H x = rhs: conjugate the system, swap bands.
    std::size_t n = diag.size();
    std::vector<Cplx> csub(n), cdiag(n), csup(n);
    for (std::size_t j = 0; j < n; ++j) {
        cdiag[j] = std::conj(diag[j]);
        csub[j] = (j > 0) ? std::conj(sup[j - 1]) : Cplx{0.0, 0.0};
        csup[j] = (j + 1 < n) ? std::conj(sub[j + 1]) : Cplx{0.0, 0.0};
    }
    // Thomas on the fly (adjoint solves are not on the hot path).
    std::vector<Cplx> dh(n), ch(n), x(n);
    dh[0] = cdiag[0];
    ch[0] = csup[0] / dh[0];
    for (std::size_t j = 1; j < n; ++j) {
        dh[j] = cdiag[j] - csub[j] * ch[j - 1];
        ch[j] = (j + 1 < n) ? csup[j] / dh[j] : Cplx{0.0, 0.0};
    }
    x[0] = rhs[0] / dh[0];
    for (std::size_t j = 1; j < n; ++j) x[j] = (rhs[j] - csub[j] * x[j - 1]) / dh[j];
    for (std::size_t j = n - 1; j-- > 0;) x[j] -= ch[j] * x[j + 1];
    return x;
}

TriFactor discrete_resolvent(const RadialGrid& grid, int l, double b, Cplx p,
                             double beta) {
    std::size_t n = grid.size();
    double h = grid.r[1] - grid.r[0]; // uniform grid expected here
    double ih2 = 1.0 / (h * h);
    TriFactor T;
    T.sub.assign(n, Cplx{0.0, 0.0});
    T.diag.assign(n, Cplx{0.0, 0.0});
    T.sup.assign(n, Cplx{0.0, 0.0});
    Cplx lambda = branch_lambda(p);
    Cplx gamma_u = exterior_logderiv(lambda, grid.a, b, l) + 1.0 / grid.a;
    for (std::size_t j = 0; j < n; ++j) {
        double r = grid.r[j];
        Cplx v = double(l * (l + 1)) / (r * r) - b / r - I_UNIT * p -
                 I_UNIT * beta;
        T.diag[j] = 2.0 * ih2 + v;
        if (j > 0) T.sub[j] = -ih2;
        if (j + 1 < n) T.sup[j] = -ih2;
    }
    // Robin closure at r = a: ghost = u_{N-2} + 2 h gamma_u u_{N-1}
    T.sub[n - 1] = -2.0 * ih2;
    T.diag[n - 1] -= 2.0 * h * gamma_u * ih2;
    T.factor();
    return T;
}

// --- sideband system ---------------------------------------------------------

SidebandSystem::SidebandSystem(const PhysicalConfig& phys,
                               const RegularizationParams& rp,
                               const RadialGrid& grid, Cplx p1, int n_min,
                               int n_max, bool use_beta)
    : grid_(&grid), phys_(phys), rp_(rp), p1_(p1), n_min_(n_min), n_max_(n_max) {
    int nb = n_max - n_min + 1;
    rbeta_.resize(nb);
    rzero_.resize(nb);
    beta_.resize(nb);
    for (int k = 0; k < nb; ++k) {
        int n = n_min + k;
        Cplx p = p1 + I_UNIT * (double(n) * phys.omega);
        double be = use_beta ? beta_schedule(p, rp) : 0.0;
        beta_[k] = be;
        rbeta_[k] = discrete_resolvent(grid, phys.l, phys.b, p, be);
        if (be != 0.0)
            rzero_[k] = discrete_resolvent(grid, phys.l, phys.b, p, 0.0);
    }
    omega_r_.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
        omega_r_[j] = phys.forcing.value(grid.r[j]);
    dscale_.resize(std::size_t(nb) * grid.size());
    for (int k = 0; k < nb; ++k) {
        double wn = std::pow(1.0 + std::abs(n_min + k), 4.0 / 3.0);
        for (std::size_t j = 0; j < grid.size(); ++j)
            dscale_[std::size_t(k) * grid.size() + j] = std::sqrt(wn * grid.w[j]);
    }
}

SidebandField SidebandSystem::apply_T(const SidebandField& y0) const {
    SidebandField out = SidebandField::zeros(n_min_, n_max_, grid_->size());
    for (int k = 0; k < out.count(); ++k) out.y[k] = rbeta_[k].solve(y0.y[k]);
    return out;
}

SidebandField SidebandSystem::apply_C(const SidebandField& yin) const {
    SidebandField out = SidebandField::zeros(n_min_, n_max_, grid_->size());
    std::size_t N = grid_->size();
    std::vector<Cplx> bracket(N);
    for (int k = 0; k < out.count(); ++k) {
        const std::vector<Cplx>* ym = (k > 0) ? &yin.y[k - 1] : nullptr;
        const std::vector<Cplx>* yp = (k + 1 < out.count()) ? &yin.y[k + 1] : nullptr;
        // -i beta y_n - [Omega_1 y_{n-1} + Omega_{-1} y_{n+1}], Omega_{+-1} = -+ i Omega
        for (std::size_t j = 0; j < N; ++j) {
            Cplx s = -I_UNIT * beta_[k] * yin.y[k][j];
            Cplx lower = ym ? (*ym)[j] : Cplx{0.0, 0.0};
            Cplx upper = yp ? (*yp)[j] : Cplx{0.0, 0.0};
            s += I_UNIT * omega_r_[j] * (lower - upper);
            bracket[j] = s;
        }
        out.y[k] = rbeta_[k].solve(bracket);
    }
    return out;
}

std::vector<Cplx> SidebandSystem::scale(const SidebandField& yin) const {
    std::size_t N = grid_->size();
    std::vector<Cplx> v(dscale_.size());
    for (int k = 0; k < yin.count(); ++k)
        for (std::size_t j = 0; j < N; ++j)
            v[std::size_t(k) * N + j] = yin.y[k][j] * dscale_[std::size_t(k) * N + j];
    return v;
}

SidebandField SidebandSystem::unscale(const std::vector<Cplx>& v) const {
    SidebandField out = SidebandField::zeros(n_min_, n_max_, grid_->size());
    std::size_t N = grid_->size();
    for (int k = 0; k < out.count(); ++k)
        for (std::size_t j = 0; j < N; ++j)
            out.y[k][j] = v[std::size_t(k) * N + j] / dscale_[std::size_t(k) * N + j];
    return out;
}

void SidebandSystem::apply_ImC_scaled(const std::vector<Cplx>& in,
                                      std::vector<Cplx>& out) const {
    SidebandField y = unscale(in);
    SidebandField cy = apply_C(y);
    out.resize(in.size());
    std::size_t N = grid_->size();
    for (int k = 0; k < y.count(); ++k)
        for (std::size_t j = 0; j < N; ++j) {
            std::size_t idx = std::size_t(k) * N + j;
            out[idx] = in[idx] - cy.y[k][j] * dscale_[idx];
        }
}

void SidebandSystem::apply_ImC_adj_scaled(const std::vector<Cplx>& in,
                                          std::vector<Cplx>& out) const {
    // (I - C)^H v with C = R S in sideband blocks: C^H = S^H R^H.
    std::size_t N = grid_->size();
    int nb = n_max_ - n_min_ + 1;
    // w_k = R_k^H (D^{-1} in)_k, then out = in - D S^H w (scaled).
    std::vector<std::vector<Cplx>> w(nb);
    std::vector<Cplx> tmp(N);
    for (int k = 0; k < nb; ++k) {
        for (std::size_t j = 0; j < N; ++j)
            tmp[j] = in[std::size_t(k) * N + j] * dscale_[std::size_t(k) * N + j];
        // The scaled operator is D C D^{-1}; its adjoint is D^{-1} C^H D.
        w[k] = rbeta_[k].solve_adjoint(tmp);
    }
    out.resize(in.size());
    for (int k = 0; k < nb; ++k) {
        for (std::size_t j = 0; j < N; ++j) {
            // (S^H w)_k = conj(-i beta_k) w_k + conj(+i Om) w_{k+1} + conj(-i Om) w_{k-1}
            Cplx s = I_UNIT * beta_[k] * w[k][j];
            if (k + 1 < nb) s += -I_UNIT * omega_r_[j] * w[k + 1][j];
            if (k > 0) s += I_UNIT * omega_r_[j] * w[k - 1][j];
            std::size_t idx = std::size_t(k) * N + j;
            out[idx] = in[idx] - s / dscale_[idx];
        }
    }
}

void SidebandSystem::apply_precond(std::vector<Cplx>& v) const {
    // Exact inverse of the beta-diagonal block: (I + i beta chi R_beta chi)^{-1}
    //   = I - i beta chi R_0 chi  (second resolvent identity).
    std::size_t N = grid_->size();
    std::vector<Cplx> tmp(N);
    for (int k = 0; k < n_max_ - n_min_ + 1; ++k) {
        if (beta_[k] == 0.0) continue;
        for (std::size_t j = 0; j < N; ++j)
            tmp[j] = v[std::size_t(k) * N + j] / dscale_[std::size_t(k) * N + j];
        std::vector<Cplx> r0 = rzero_[k].solve(tmp);
        for (std::size_t j = 0; j < N; ++j) {
            std::size_t idx = std::size_t(k) * N + j;
            v[idx] -= I_UNIT * beta_[k] * r0[j] * dscale_[idx];
        }
    }
}

namespace {

double vnorm(const std::vector<Cplx>& v) {
    double s = 0.0;
    for (const Cplx& z : v) s += std::norm(z);
    return std::sqrt(s);
}

Cplx vdot(const std::vector<Cplx>& a, const std::vector<Cplx>& b) {
    Cplx s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += std::conj(a[j]) * b[j];
    return s;
}

// Restarted GMRES for op(x) on complex vectors; returns achieved residual.
double gmres(const std::function<void(const std::vector<Cplx>&, std::vector<Cplx>&)>& op,
             const std::vector<Cplx>& rhs, std::vector<Cplx>& x, double tol,
             int restart, int max_outer) {
    std::size_t n = rhs.size();
    if (x.size() != n) x.assign(n, Cplx{0.0, 0.0});
    double bnorm = vnorm(rhs);
    if (bnorm == 0.0) {
        x.assign(n, Cplx{0.0, 0.0});
        return 0.0;
    }
    std::vector<Cplx> r(n), w(n);
    double res = 1e300;
    for (int outer = 0; outer < max_outer; ++outer) {
        op(x, r);
        for (std::size_t j = 0; j < n; ++j) r[j] = rhs[j] - r[j];
        double rn = vnorm(r);
        res = rn / bnorm;
        if (res < tol) return res;
        int m = restart;
        std::vector<std::vector<Cplx>> V;
        V.reserve(m + 1);
        std::vector<std::vector<Cplx>> H(m + 1, std::vector<Cplx>(m, Cplx{0.0, 0.0}));
        std::vector<Cplx> cs(m), sn(m), g(m + 1, Cplx{0.0, 0.0});
        V.push_back(r);
        for (auto& z : V[0]) z /= rn;
        g[0] = rn;
        int k = 0;
        for (; k < m; ++k) {
            op(V[k], w);
            for (int i = 0; i <= k; ++i) {
                H[i][k] = vdot(V[i], w);
                for (std::size_t j = 0; j < n; ++j) w[j] -= H[i][k] * V[i][j];
            }
            double hn = vnorm(w);
            H[k + 1][k] = hn;
            // Givens rotations
            for (int i = 0; i < k; ++i) {
                Cplx t = std::conj(cs[i]) * H[i][k] + std::conj(sn[i]) * H[i + 1][k];
                H[i + 1][k] = -sn[i] * H[i][k] + cs[i] * H[i + 1][k];
                H[i][k] = t;
            }
            double denom = std::sqrt(std::norm(H[k][k]) + hn * hn);
            if (denom == 0.0) { cs[k] = 1.0; sn[k] = 0.0; }
            else { cs[k] = H[k][k] / denom; sn[k] = hn / denom; }
            H[k][k] = std::conj(cs[k]) * H[k][k] + std::conj(sn[k]) * hn;
            H[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = std::conj(cs[k]) * g[k];
            double rk = std::abs(g[k + 1]) / bnorm;
            if (hn > 0.0) {
                V.push_back(w);
                for (auto& z : V.back()) z /= hn;
            }
            if (rk < tol || hn == 0.0) { ++k; break; }
        }
        // back substitution
        std::vector<Cplx> yk(k, Cplx{0.0, 0.0});
        for (int i = k - 1; i >= 0; --i) {
            Cplx s = g[i];
            for (int j2 = i + 1; j2 < k; ++j2) s -= H[i][j2] * yk[j2];
            yk[i] = s / H[i][i];
        }
        for (int i = 0; i < k; ++i)
            for (std::size_t j = 0; j < n; ++j) x[j] += yk[i] * V[i][j];
    }
    op(x, r);
    for (std::size_t j = 0; j < n; ++j) r[j] = rhs[j] - r[j];
    return vnorm(r) / bnorm;
}

} // namespace

SidebandField SidebandSystem::solve_ImC(const SidebandField& rhs, double tol,
                                        int max_iter, double* residual_out) const {
    std::vector<Cplx> b = scale(rhs);
    apply_precond(b);
    auto op = [this](const std::vector<Cplx>& in, std::vector<Cplx>& out) {
        apply_ImC_scaled(in, out);
        apply_precond(out);
    };
    std::vector<Cplx> x;
    int restart = 40;
    int outers = std::max(1, max_iter / restart);
    double res = gmres(op, b, x, tol, restart, outers);
    if (res > 10.0 * tol)
        throw NumericError("solve_ImC: GMRES stalled, residual " + std::to_string(res) +
                           " (near-singular system?)");
    // report the unpreconditioned residual
    if (residual_out) {
        std::vector<Cplx> ax;
        apply_ImC_scaled(x, ax);
        std::vector<Cplx> b0 = scale(rhs);
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < ax.size(); ++j) {
            num += std::norm(b0[j] - ax[j]);
            den += std::norm(b0[j]);
        }
        *residual_out = std::sqrt(num / std::max(den, 1e-300));
    }
    return unscale(x);
}

double SidebandSystem::min_resolvent_pivot() const {
    double m = 1e300;
    for (const auto& t : rbeta_) m = std::min(m, t.min_pivot_ratio);
    return m;
}

double SidebandSystem::min_singular_value(int iters, double tol,
                                          std::uint64_t seed) const {
    // Inverse power iteration on (I-C)^{-1} (I-C)^{-H} in the scaled metric.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::size_t n = dscale_.size();
    std::vector<Cplx> v(n);
    for (auto& z : v) z = Cplx{nd(rng), nd(rng)};
    double nv = vnorm(v);
    for (auto& z : v) z /= nv;
    auto opA = [this](const std::vector<Cplx>& in, std::vector<Cplx>& out) {
        apply_ImC_scaled(in, out);
    };
    auto opAH = [this](const std::vector<Cplx>& in, std::vector<Cplx>& out) {
        apply_ImC_adj_scaled(in, out);
    };
    double sigma = 0.0, prev = -1.0;
    std::vector<Cplx> w, x;
    for (int it = 0; it < iters; ++it) {
        // w = (I-C)^{-H} v  : solve A^H w = v
        w.assign(n, Cplx{0.0, 0.0});
        gmres(opAH, v, w, tol, 40, 8);
        // x = (I-C)^{-1} w
        x.assign(n, Cplx{0.0, 0.0});
        gmres(opA, w, x, tol, 40, 8);
        double nx = vnorm(x);
        if (nx == 0.0) throw NumericError("min_singular_value: zero iterate");
        sigma = 1.0 / std::sqrt(nx); // since ||x|| -> 1/sigma_min^2 on unit v
        for (std::size_t j = 0; j < n; ++j) v[j] = x[j] / nx;
        if (prev > 0.0 && std::abs(sigma - prev) < 2e-3 * sigma && it >= 3) break;
        prev = sigma;
    }
    return sigma;
}

// --- assemble_rhs --------------------------------------------------------------

std::vector<Cplx> apply_channel_h(const std::vector<Cplx>& u,
                                  const RadialGrid& grid, int l, double b) {
    std::size_t n = grid.size();
    std::vector<Cplx> out(n);
    double h = grid.r[1] - grid.r[0];
    double ih2 = 1.0 / (h * h);
    for (std::size_t j = 0; j < n; ++j) {
        Cplx um = (j > 0) ? u[j - 1] : Cplx{0.0, 0.0};     // u(0) = 0
        Cplx up = (j + 1 < n) ? u[j + 1] : Cplx{0.0, 0.0}; // supported input
        double r = grid.r[j];
        out[j] = (-um + 2.0 * u[j] - up) * ih2 +
                 (double(l * (l + 1)) / (r * r) - b / r) * u[j];
    }
    return out;
}

SidebandField assemble_rhs(const std::vector<Cplx>& psi0_u, Cplx p1,
                           const PhysicalConfig& phys, const RadialGrid& grid,
                           int n_min, int n_max) {
    std::size_t N = grid.size();
    if (psi0_u.size() != N) throw ValidationError("assemble_rhs: size mismatch");
    // support check: state must vanish well inside the ball
    for (std::size_t j = 0; j < N; ++j)
        if (grid.r[j] > grid.a - 4.0 * (grid.r[1] - grid.r[0]) &&
            std::abs(psi0_u[j]) > 1e-12)
            throw ValidationError("assemble_rhs: initial state support reaches the ball edge");
    std::vector<Cplx> hpsi = apply_channel_h(psi0_u, grid, phys.l, phys.b);
    SidebandField f = SidebandField::zeros(n_min, n_max, N);
    for (int n = n_min; n <= n_max; ++n) {
        Cplx p = p1 + I_UNIT * (double(n) * phys.omega);
        Cplx d0 = 1.0 + p;
        Cplx dp = 1.0 + p - I_UNIT * phys.omega; // j = +1
        Cplx dm = 1.0 + p + I_UNIT * phys.omega; // j = -1
        auto& row = f.at_n(n);
        for (std::size_t j = 0; j < N; ++j) {
            double Om = phys.forcing.value(grid.r[j]);
            // y0 = -(i psi0 + H psi0)/(1+p) - [Omega_1/(1+p-i w) + Omega_{-1}/(1+p+i w)] psi0
            // with Omega_{+-1} = -+ i Omega.
            row[j] = -(I_UNIT * psi0_u[j] + hpsi[j]) / d0 +
                     I_UNIT * Om * psi0_u[j] / dp - I_UNIT * Om * psi0_u[j] / dm;
        }
    }
    return f;
}

FloquetSolveResult solve_inhomogeneous(const std::vector<Cplx>& psi0_u, Cplx p1,
                                       const PhysicalConfig& phys,
                                       const RegularizationParams& rp,
                                       const RadialGrid& grid,
                                       const SolverParams& solver) {
    int nb = solver.n_sidebands;
    SidebandSystem sys(phys, rp, grid, p1, -nb, nb);
    SidebandField y0 = assemble_rhs(psi0_u, p1, phys, grid, -nb, nb);
    SidebandField ty0 = sys.apply_T(y0);
    FloquetSolveResult out;
    out.rhs_norm = std::sqrt(ty0.weighted_norm2(grid));
    out.Y = sys.solve_ImC(ty0, solver.tol, 800, &out.residual);
    return out;
}

std::vector<ScanRecord> min_singval_scan(const std::vector<Cplx>& p1_grid,
                                         const PhysicalConfig& phys,
                                         const RegularizationParams& rp,
                                         const RadialGrid& grid,
                                         const SolverParams& solver,
                                         bool use_beta) {
    std::vector<ScanRecord> recs(p1_grid.size());
    parallel_for(p1_grid.size(), solver.threads, [&](std::size_t i) {
        ScanRecord rec;
        rec.p1 = p1_grid[i];
        try {
            SidebandSystem sys(phys, rp, grid, p1_grid[i], -solver.n_sidebands,
                               solver.n_sidebands, use_beta);
            rec.min_pivot = sys.min_resolvent_pivot();
            rec.sigma_min = sys.min_singular_value(25, 1e-6, 1234 + i);
        } catch (const NumericError&) {
            rec.pole_flag = true;
        }
        recs[i] = rec;
    });
    return recs;
}

std::vector<double> inversion_q_grid(double omega, int per_period, double ratio) {
    double h = omega / per_period;
    std::vector<double> q;
    // geometric cluster toward 0
    double q0 = h;
    std::vector<double> clus;
    while (q0 > 1e-7 * omega) {
        q0 /= ratio;
        clus.push_back(q0);
    }
    for (auto it = clus.rbegin(); it != clus.rend(); ++it) q.push_back(*it);
    for (int k = 1; k < per_period; ++k) q.push_back(h * k);
    // cluster toward omega
    double q1 = omega - h;
    std::vector<double> clus2;
    double gap = h;
    while (gap > 1e-7 * omega) {
        gap /= ratio;
        clus2.push_back(omega - gap);
    }
    for (double v : clus2) q.push_back(v);
    std::sort(q.begin(), q.end());
    q.erase(std::unique(q.begin(), q.end()), q.end());
    return q;
}

InverseLaplaceResult inverse_laplace_P(const std::vector<double>& t_grid,
                                       const std::vector<Cplx>& psi0_u,
                                       const PhysicalConfig& phys,
                                       const RegularizationParams& rp,
                                       const RadialGrid& grid,
                                       const SolverParams& solver) {
    std::vector<double> q =
        inversion_q_grid(phys.omega, solver.q_points, solver.q_cluster_ratio);
    std::size_t N = grid.size(), T = t_grid.size();
    int nb = solver.n_sidebands;
    // Nyquist check: oscillation e^{i q t} must be resolved by the base grid.
    double tmax = *std::max_element(t_grid.begin(), t_grid.end());
    double hbase = phys.omega / solver.q_points;
    if (hbase * tmax > 2.5)
        throw NumericError("inverse_laplace_P: q grid too coarse for requested t range");

    int threads = std::max(1, solver.threads);

    // Pass 1: field norms on the base grid, then local refinement where the
    // norm profile is steep (narrow resonances sit between base nodes).
    SolverParams probe = solver; // cheap probe solves for the refinement scan
    probe.n_sidebands = std::max(8, solver.n_sidebands / 3);
    probe.tol = std::max(solver.tol, 1e-6);
    auto norms_at = [&](const std::vector<double>& qs) {
        std::vector<double> nn(qs.size());
        parallel_for(qs.size(), threads, [&](std::size_t i) {
            FloquetSolveResult sol = solve_inhomogeneous(
                psi0_u, I_UNIT * qs[i], phys, rp, grid, probe);
            nn[i] = std::sqrt(sol.Y.weighted_norm2(grid));
        });
        return nn;
    };
    std::vector<double> nq = norms_at(q);
    for (int round = 0; round < 2; ++round) {
        std::vector<double> extra;
        for (std::size_t i = 0; i + 1 < q.size(); ++i) {
            double jump = std::abs(std::log(nq[i + 1] / nq[i]));
            bool near_peak =
                (i > 0 && nq[i] > nq[i - 1] && nq[i] > nq[i + 1] && jump > 0.05) ||
                jump > 0.15;
            if (!near_peak) continue;
            int pieces = std::min(8, 2 + int(jump / 0.1));
            for (int m = 1; m < pieces; ++m)
                extra.push_back(q[i] + (q[i + 1] - q[i]) * double(m) / pieces);
        }
        if (extra.empty()) break;
        std::vector<double> en = norms_at(extra);
        std::vector<std::pair<double, double>> merged;
        merged.reserve(q.size() + extra.size());
        for (std::size_t i = 0; i < q.size(); ++i) merged.push_back({q[i], nq[i]});
        for (std::size_t i = 0; i < extra.size(); ++i) merged.push_back({extra[i], en[i]});
        std::sort(merged.begin(), merged.end());
        q.resize(merged.size());
        nq.resize(merged.size());
        for (std::size_t i = 0; i < merged.size(); ++i) {
            q[i] = merged[i].first;
            nq[i] = merged[i].second;
        }
        log_info("inverse_laplace_P: refinement round %d added %zu points", round,
                 extra.size());
    }

    // Pass 2: full synthesis on the final grid.
    std::size_t Q = q.size();
    std::vector<double> wq(Q, 0.0);
    for (std::size_t i = 0; i < Q; ++i) {
        double lo = (i == 0) ? 0.0 : 0.5 * (q[i - 1] + q[i]);
        double hi = (i + 1 < Q) ? 0.5 * (q[i] + q[i + 1]) : phys.omega;
        wq[i] = hi - lo;
    }
    std::vector<std::vector<Cplx>> psi_acc(T, std::vector<Cplx>(N, Cplx{0.0, 0.0}));
    std::vector<double> fieldnorm(Q, 0.0);
    std::mutex acc_mutex;
    parallel_for(Q, threads, [&](std::size_t i) {
        Cplx p1 = I_UNIT * q[i];
        FloquetSolveResult sol =
            solve_inhomogeneous(psi0_u, p1, phys, rp, grid, solver);
        fieldnorm[i] = std::sqrt(sol.Y.weighted_norm2(grid));
        std::vector<std::vector<Cplx>> local(T, std::vector<Cplx>(N, Cplx{0.0, 0.0}));
        for (std::size_t it = 0; it < T; ++it) {
            double t = t_grid[it];
            for (int n = -nb; n <= nb; ++n) {
                Cplx phase = std::exp(I_UNIT * ((q[i] + n * phys.omega) * t)) *
                             (wq[i] / (2.0 * PI));
                const auto& yn = sol.Y.at_n(n);
                auto& row = local[it];
                for (std::size_t j = 0; j < N; ++j) row[j] += phase * yn[j];
            }
        }
        std::lock_guard<std::mutex> lk(acc_mutex);
        for (std::size_t it = 0; it < T; ++it)
            for (std::size_t j = 0; j < N; ++j) psi_acc[it][j] += local[it][j];
    });

    InverseLaplaceResult out;
    out.t = t_grid;
    out.q = q;
    out.field_norm = fieldnorm;
    out.P.resize(T);
    for (std::size_t it = 0; it < T; ++it) {
        double t = t_grid[it];
        double s = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            Cplx psi = psi0_u[j] * std::exp(-t) + psi_acc[it][j];
            s += grid.w[j] * std::norm(psi);
        }
        out.P[it] = s;
    }
    return out;
}

SlopeFit decay_exponent_fit(const std::vector<double>& t,
                            const std::vector<double>& P, double t_lo,
                            double t_hi) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (P[i] <= 0.0) throw NumericError("decay_exponent_fit: non-positive data");
        xs.push_back(std::log(t[i]));
        ys.push_back(std::log(P[i]));
    }
    std::size_t n = xs.size();
    if (n < 3) throw ValidationError("decay_exponent_fit: fewer than 3 points in window");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double denom = n * sxx - sx * sx;
    SlopeFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    double icpt = (sy - f.slope * sx) / n;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = ys[i] - (icpt + f.slope * xs[i]);
        sse += e * e;
    }
    f.stderr_slope = (n > 2) ? std::sqrt(sse / double(n - 2) * double(n) / denom) : 0.0;
    f.n_points = int(n);
    return f;
}

} // namespace ion
