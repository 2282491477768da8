#ifndef ION_WKB_HPP
#define ION_WKB_HPP

#include <functional>
#include <memory>
#include <vector>

#include "ion/config.hpp"
#include "ion/types.hpp"

namespace ion {

// s(r) = Int_r^1 sqrt(Omega), by adaptive quadrature (error < 1e-12).
double action_s(const ForcingProfile& forcing, double r);

// Frame of the large-k analysis: the action s(r), the constants at r = 0,
// the scaled variable zeta = alpha k r, and the normalization case.
// The spectral parameter is restricted to p1 on iR (ip1 real), which keeps
// the whole chain real after the i^k scaling.
struct WKBFrame {
    ForcingProfile forcing;
    double omega = 1.0, b = 1.0;
    int l = 0;
    int tau = 0;   // 0: v_{n0}(1) = 1;  1: v'_{n0}(1) = -sqrt(Omega(1))
    int n0 = 0;
    double ip1 = 0.0; // real part of i p1 (p1 on iR)

    double Omega0 = 0.0, Omega0p = 0.0, s0 = 0.0, alpha = 0.0;

    // dense tables on [0, 1]
    std::vector<double> rg;      // nodes
    std::vector<double> s_tab;   // s(r)
    std::vector<double> e_tab;   // Int_1^r s/sqrt(Omega)

    static WKBFrame make(const ForcingProfile& forcing, double omega, double b,
                         int l, int tau, int n0, double ip1);

    double s_of_r(double r) const;
    double r_of_s(double s) const;
    double exp_integral(double r) const; // Int_1^r s/sqrt(Omega)
    double zeta(int k, double r) const { return alpha * k * r; }
    double Qk(int k, double r) const;   // b/r + (k - n0) w + ip1 - l(l+1)/r^2
};

// H(zeta; k, l) = H0 + k^{-1} Hcheck from Picard iteration of the integral
// equation; stored on a zeta grid with derivative, plus the endpoint H(alpha k).
struct HProfile {
    int k = 0, l = 0;
    double alpha = 0.0;
    std::vector<double> zg, H, Hp, Hpp, Hck;
    double H_end = 0.0; // H(alpha k)
    int iterations = 0;

    double at(double zeta) const;
    double d1(double zeta) const;
    double d2(double zeta, const WKBFrame& fr) const; // from the ODE
    double hcheck_at(double zeta) const;
};

HProfile solve_H(int k, const WKBFrame& frame);

double H0_fn(int l, double zeta); // sqrt(2/pi) e^z z^{1/2} K_{l+1/2}
double G0_fn(int l, double zeta); // sqrt(pi/2) e^z z^{1/2} I_{l+1/2}
double H0_d1(int l, double zeta);
double G0_d1(int l, double zeta);

// m_k profile in log space: log m_k = (2k+tau) log s(r) - log (2k+tau)! + log F_k.
struct MkProfile {
    int k = 0;
    const WKBFrame* frame = nullptr;
    std::shared_ptr<HProfile> hk;

    double log_Fk(double r) const;
    double log_mk(double r) const;
    double mk(double r) const; // may underflow to 0 for large k near r = 1
};

MkProfile make_mk(int k, const WKBFrame& frame, std::shared_ptr<HProfile> hk);

// j_k(r) per the explicit k^2/k/1 decomposition; returns value and an
// FD-in-r derivative.
struct JkValue {
    double value = 0.0;
    double deriv = 0.0;
};
JkValue j_k_eval(int k, double r, const WKBFrame& frame, const HProfile& Hk,
                 const HProfile& Hkm1);

// Basis solutions of psi'' + Q_k psi = 0 from r = 1 inward, their Wronskian,
// and the Green's kernel G_k(r, s).
struct BasisGreen {
    int k = 0;
    std::vector<double> rg;
    std::vector<double> p1, p1d, p2, p2d; // psi1, psi1', psi2, psi2'
    double wronskian_drift = 0.0;         // max |W - W(1)| observed

    double psi1(double r) const;
    double psi2(double r) const;
    double psi1d(double r) const;
    double psi2d(double r) const;
    double G(double r, double s) const;   // psi1(r) psi2(s) - psi2(r) psi1(s)
    double dGdr(double r, double s) const;
};

BasisGreen basis_green(int k, const WKBFrame& frame, double r_min);

// The coupled chain g_{n0-k} = i^k G_k, solved by a power series in s at
// r = 1 handed off to RK4 integration inward.
struct ChainResult {
    int K_max = 0;
    int tau = 0;
    const WKBFrame* frame = nullptr;
    std::vector<double> rg;                  // nodes, increasing, [r_min, r_s]
    std::vector<std::vector<double>> G, Gp;  // G[k], dG/dr[k] on rg
    std::vector<std::vector<double>> series; // s-series coefficients per k
    double r_series = 0.0;                   // series/RK4 handoff radius
    double s_series = 0.0;

    double h1(int k) const; // h_k(1) = c_{k,2k+tau} (2k+tau)!
    // Evaluate G_k at any r in [r_min, 1] (Hermite interpolation; series
    // beyond the handoff).
    double eval(int k, double r) const;
    double eval_d(int k, double r) const;
};

ChainResult chain_solve(int K_max, const WKBFrame& frame, double r_min,
                        double series_frac = 0.25, int series_pad = 14);

// Direct RK4 integration of the chain from r = 1 with the boundary data
// (no series start); suitable for small K_max and finite-difference checks
// of the Taylor structure at r = 1. Nodes cover [r_lo, 1].
ChainResult chain_solve_direct(int K_max, const WKBFrame& frame, double r_lo);

// h_k(r) = G_k(r) / m_k(r).
std::vector<double> h_k_extract(const ChainResult& chain, const MkProfile& mk,
                                const std::vector<double>& r_pts, int k);

// The two integral operators of the h-chain fixed point, evaluated at r:
//   (A_k f)(r) = Int_r^1 Omega m_{k-1}/m_k(r) G_k(r,s) f(s) ds
//   (H_k f)(r) = Int_r^1 Omega m_{k+1}/m_k(r) G_k(r,s) f(s) ds
// using the t-substitution away from the origin and the zeta variable below
// r_hat = C2 log k / k.
struct AkHkOps {
    int k;
    const WKBFrame* frame;
    MkProfile mk, mkm1, mkp1;
    std::shared_ptr<BasisGreen> green;
    double C2 = 2.0;

    double apply_A(const std::function<double(double)>& f, double r) const;
    double apply_H(const std::function<double(double)>& f, double r) const;
};

AkHkOps make_ops(int k, const WKBFrame& frame);

// Lemma-46-style identities: I1 = Int e^{-eta+zeta} G0(zeta,eta) H0(eta)/H0(zeta),
// I2 the d/dzeta variant; G0(zeta,eta) = (eta^{l+1} zeta^{-l} - zeta^{l+1} eta^{-l})/(2l+1).
struct G0Identity {
    double I1 = 0.0, I2 = 0.0;
};
G0Identity g0_identity(double zeta, int l);

// Finite-difference weights (Fornberg) for d^m/dx^m at x0 from given nodes.
std::vector<double> fd_weights(double x0, const std::vector<double>& xs, int m);

} // namespace ion

#endif
