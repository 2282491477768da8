#ifndef ION_FLOQUET_HPP
#define ION_FLOQUET_HPP

#include <memory>
#include <vector>

#include "ion/config.hpp"
#include "ion/grid.hpp"
#include "ion/spectral.hpp"
#include "ion/types.hpp"

namespace ion {

// beta(p): c inside the window Im p in [-eps, p_c], Re p >= 0; zero outside.
double beta_schedule(Cplx p, const RegularizationParams& rp);

// Vector of radial sideband profiles y_n, n in [n_min, n_max], in the
// u = r R representation on a shared radial grid over (0, a].
struct SidebandField {
    int n_min = 0, n_max = 0;
    std::vector<std::vector<Cplx>> y; // y[k] is sideband n_min + k

    int count() const { return n_max - n_min + 1; }
    std::vector<Cplx>& at_n(int n) { return y[n - n_min]; }
    const std::vector<Cplx>& at_n(int n) const { return y[n - n_min]; }
    static SidebandField zeros(int n_min, int n_max, std::size_t n_radial);

    // || Y ||^2 = sum_n (1 + |n|)^{4/3} || y_n ||^2_{L^2}
    double weighted_norm2(const RadialGrid& grid) const;
};

// Complex tridiagonal system with prefactored Thomas elimination.
struct TriFactor {
    std::vector<Cplx> sub, diag, sup; // original bands
    std::vector<Cplx> dhat;           // eliminated diagonal
    std::vector<Cplx> chat;           // eliminated superdiagonal
    double min_pivot_ratio = 1.0;     // min |dhat| / max |dhat|

    void factor();
    std::vector<Cplx> solve(const std::vector<Cplx>& rhs) const;
    // Solve with the conjugate transpose.
    std::vector<Cplx> solve_adjoint(const std::vector<Cplx>& rhs) const;
};

// Discretized sandwiched resolvent chi_B R_beta(p) chi_B in u-form: the
// radial operator -d2/dr2 + l(l+1)/r^2 - b/r - i p - i beta on (0, a] with
// u(0) = 0 and the exact outgoing closure u'(a) = gamma_u u(a) from the
// exterior Whittaker log-derivative.
TriFactor discrete_resolvent(const RadialGrid& grid, int l, double b, Cplx p,
                             double beta);

// The truncated sideband system at fixed p1.
class SidebandSystem {
  public:
    SidebandSystem(const PhysicalConfig& phys, const RegularizationParams& rp,
                   const RadialGrid& grid, Cplx p1, int n_min, int n_max,
                   bool use_beta = true);

    // {T Y0}_n = chi R_beta(p_n) y0_n
    SidebandField apply_T(const SidebandField& y0) const;
    // {C Y}_n = chi R_beta(p_n) chi [ -i beta_n y_n - sum_j Omega_j y_{n-j} ]
    SidebandField apply_C(const SidebandField& yin) const;

    // Scaled-space operations (Euclidean metric absorbing the H-norm weights):
    // v = D y with D = sqrt((1+|n|)^{4/3} w_j). Lengths are count()*grid.size().
    std::vector<Cplx> scale(const SidebandField& yin) const;
    SidebandField unscale(const std::vector<Cplx>& v) const;
    void apply_ImC_scaled(const std::vector<Cplx>& in, std::vector<Cplx>& out) const;
    void apply_ImC_adj_scaled(const std::vector<Cplx>& in, std::vector<Cplx>& out) const;

    // Solve (I - C) Y = rhs by restarted GMRES in the scaled space.
    SidebandField solve_ImC(const SidebandField& rhs, double tol, int max_iter,
                            double* residual_out = nullptr) const;

    // Smallest singular value of I - C (scaled metric) by inverse power
    // iteration; also reports the worst per-sideband resolvent conditioning.
    double min_singular_value(int iters, double tol, std::uint64_t seed) const;
    double min_resolvent_pivot() const;

    const RadialGrid& grid() const { return *grid_; }
    int n_min() const { return n_min_; }
    int n_max() const { return n_max_; }
    Cplx p1() const { return p1_; }
    double beta_of(int n) const { return beta_[n - n_min_]; }

  private:
    const RadialGrid* grid_;
    PhysicalConfig phys_;
    RegularizationParams rp_;
    Cplx p1_;
    int n_min_, n_max_;
    std::vector<TriFactor> rbeta_;   // factorization per sideband
    std::vector<TriFactor> rzero_;   // beta-off factorizations (preconditioner)
    std::vector<double> beta_;
    std::vector<double> omega_r_;    // forcing profile on the grid
    std::vector<double> dscale_;     // sqrt((1+|n|)^{4/3} w_j), flattened

    void apply_precond(std::vector<Cplx>& v) const;
};

// y0_n per Eq.-(10)-style right-hand side for the single-harmonic forcing,
// u-representation; psi0_u must vanish near r = a.
SidebandField assemble_rhs(const std::vector<Cplx>& psi0_u, Cplx p1,
                           const PhysicalConfig& phys, const RadialGrid& grid,
                           int n_min, int n_max);

// Discrete channel Hamiltonian action: (-d2/dr2 + l(l+1)/r^2 - b/r) u.
std::vector<Cplx> apply_channel_h(const std::vector<Cplx>& u,
                                  const RadialGrid& grid, int l, double b);

// Full solve at p1: Y = (I - C)^{-1} T Y0.
struct FloquetSolveResult {
    SidebandField Y;
    double residual = 0.0;
    double rhs_norm = 0.0; // ||T Y0||
};
FloquetSolveResult solve_inhomogeneous(const std::vector<Cplx>& psi0_u, Cplx p1,
                                       const PhysicalConfig& phys,
                                       const RegularizationParams& rp,
                                       const RadialGrid& grid,
                                       const SolverParams& solver);

// sigma_min scan over p1 = i q, q in [0, omega).
struct ScanRecord {
    Cplx p1;
    double sigma_min = 0.0;
    double min_pivot = 0.0;
    bool pole_flag = false;
};
std::vector<ScanRecord> min_singval_scan(const std::vector<Cplx>& p1_grid,
                                         const PhysicalConfig& phys,
                                         const RegularizationParams& rp,
                                         const RadialGrid& grid,
                                         const SolverParams& solver,
                                         bool use_beta = true);

// Clustered inversion grid on (0, omega): `per_period` uniform points with
// geometric refinement (given ratio) toward both endpoints.
std::vector<double> inversion_q_grid(double omega, int per_period, double ratio);

// P(t, B_a) by inverse Laplace transform along iR: solves the sideband system
// on the q grid and synthesizes psi(t) = psi0 e^{-t} + y(t).
struct InverseLaplaceResult {
    std::vector<double> t;
    std::vector<double> P;
    // extras for diagnostics: per-q field norms
    std::vector<double> q;
    std::vector<double> field_norm;
};
InverseLaplaceResult inverse_laplace_P(const std::vector<double>& t_grid,
                                       const std::vector<Cplx>& psi0_u,
                                       const PhysicalConfig& phys,
                                       const RegularizationParams& rp,
                                       const RadialGrid& grid,
                                       const SolverParams& solver);

// Least-squares slope of log P against log t on [t_lo, t_hi].
struct SlopeFit {
    double slope = 0.0;
    double stderr_slope = 0.0;
    int n_points = 0;
};
SlopeFit decay_exponent_fit(const std::vector<double>& t,
                            const std::vector<double>& P, double t_lo,
                            double t_hi);

} // namespace ion

#endif
