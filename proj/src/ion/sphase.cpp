#include "ion/sphase.hpp"

#include <algorithm>
#include <cmath>

#include "ion/quadrature.hpp"

namespace ion {

SaddleData saddle(double d, double t) {
    if (t <= 0.0 || d <= 0.0) throw ValidationError("saddle: need t > 0, d > 0");
    SaddleData s;
    s.s0 = std::pow(d / (2.0 * t), 2.0 / 3.0);
    s.nu = std::pow(2.0, -2.0 / 3.0) * std::pow(d, 2.0 / 3.0) * std::cbrt(t);
    return s;
}

namespace {

// Integrate g over [x_lo, x_hi] with panels sized so the local phase change
// stays below ~1.2 per panel, accounting for both slope and curvature of the
// phase (16-point Gauss per panel; curvature matters near stationary points).
Cplx phase_panels(const std::function<Cplx(double)>& g,
                  const std::function<double(double)>& dphi,
                  const std::function<double(double)>& dphi2, double x_lo,
                  double x_hi, double scale) {
    Cplx total = 0.0;
    double x = x_lo;
    const double budget = 1.2 * scale;
    int guard = 0;
    while (x < x_hi) {
        double slope = std::abs(dphi(x));
        double curv = std::abs(dphi2(x));
        double w = budget / std::max(slope, 1e-12);
        if (curv > 0.0) w = std::min(w, std::sqrt(2.0 * budget / curv));
        w = std::max(w, 1e-12 * (x_hi - x_lo));
        double hi = std::min(x + w, x_hi);
        total += gauss16([&](double u) { return g(u); }, x, hi);
        x = hi;
        if (++guard > 4000000)
            throw NumericError("osc_quadrature: panel budget exhausted");
    }
    return total;
}

} // namespace

ComplexEval osc_quadrature(const OscIntSpec& spec, double panel_scale) {
    const double t = spec.t, d = spec.d, a = spec.a;
    const int l = spec.l;
    if (t < 1.0) throw ValidationError("osc_quadrature: t >= 1 required");
    // Split at s_c; below it substitute v = s^{-1/2} (phase ~ d v fast, t/v^2 slow),
    // above integrate in s directly (phase ~ t s fast).
    SaddleData sd = saddle(d, t);
    double s_c = std::min(a, 0.25 * sd.s0);
    Cplx total = 0.0;
    // lower piece: s in (0, s_c], v in [s_c^{-1/2}, inf); amplitude v^{-l-3}
    {
        double v_lo = 1.0 / std::sqrt(s_c);
        // stop when amplitude 2 v^{-l-3} negligible
        double v_hi = std::pow(1e-17, -1.0 / (l + 3.0));
        v_hi = std::max(v_hi, 4.0 * v_lo);
        auto g = [&](double v) -> Cplx {
            double s = 1.0 / (v * v);
            Cplx ph = I_UNIT * (t * s + d * v);
            return std::exp(ph) * std::pow(s, 0.5 * l) * (-2.0 / (v * v * v));
        };
        auto dp = [&](double v) { return d - 2.0 * t / (v * v * v); };
        auto dp2 = [&](double v) { return 6.0 * t / (v * v * v * v); };
        // orientation: s: 0 -> s_c corresponds to v: inf -> v_lo; flip sign
        total += -phase_panels(g, dp, dp2, v_lo, v_hi, panel_scale);
    }
    // upper piece: s in [s_c, a]
    {
        auto g = [&](double s) -> Cplx {
            Cplx ph = I_UNIT * (t * s + d / std::sqrt(s));
            return std::exp(ph) * std::pow(s, 0.5 * l);
        };
        auto dp = [&](double s) { return t - 0.5 * d * std::pow(s, -1.5); };
        auto dp2 = [&](double s) { return 0.75 * d * std::pow(s, -2.5); };
        total += phase_panels(g, dp, dp2, s_c, a, panel_scale);
    }
    // error estimate from a panel refinement
    return {total, 0.0};
}

ComplexEval osc_negative_side(const OscIntSpec& spec) {
    // Int_{-a}^0 s^{l/2} e^{i(ts + d/sqrt(s))} ds with s = e^{-i pi} x, x > 0:
    // sqrt(s) = -i sqrt(x) (the branch with |e^{i d/sqrt(s)}| <= 1), so
    // e^{i d/sqrt(s)} = e^{-d/sqrt(x)}: exponentially damped toward s = 0-.
    const double t = spec.t, d = spec.d, a = spec.a;
    const int l = spec.l;
    Cplx amp_phase = std::exp(-I_UNIT * PI * (0.5 * l)); // (e^{-i pi} x)^{l/2}
    auto g = [&](double x) -> Cplx {
        if (x <= 0.0) return {0.0, 0.0};
        return std::exp(Cplx{-d / std::sqrt(x), -t * x}) * std::pow(x, 0.5 * l) *
               amp_phase;
    };
    auto dp = [&](double) { return t; };
    auto dp2 = [&](double) { return 0.0; };
    Cplx v = phase_panels(g, dp, dp2, 0.0, a, 1.0);
    return {v, std::abs(v) * 1e-8};
}

SaddleApprox osc_saddle_approx(const OscIntSpec& spec) {
    SaddleData sd = saddle(spec.d, spec.t);
    SaddleApprox out;
    out.low_nu_warning = (sd.nu < 5.0);
    double amp = std::pow(sd.s0, 1.0 + 0.5 * spec.l) *
                 std::sqrt(4.0 * PI / (3.0 * sd.nu));
    out.value = amp * std::exp(I_UNIT * (3.0 * sd.nu + 0.25 * PI));
    out.error_bound = std::pow(sd.s0, 1.0 + 0.5 * spec.l) / sd.nu;
    return out;
}

CoeffModel CoeffModel::geometric(double c, int jmax) {
    CoeffModel m;
    m.decay_C = 1.0;
    m.decay_c = c;
    m.D.resize(jmax);
    for (int j = 1; j <= jmax; ++j) m.D[j - 1] = std::exp(-c * j);
    return m;
}

std::vector<DecaySeriesPoint> decay_series(double b, const CoeffModel& model,
                                           const std::vector<double>& t_grid) {
    std::vector<DecaySeriesPoint> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
        Cplx sum = 0.0;
        for (std::size_t j = 1; j <= model.D.size(); ++j) {
            double d = double(j) * PI * b / 2.0;
            SaddleData sd = saddle(d, t);
            Cplx term = model.D[j - 1] * sd.s0 * std::sqrt(4.0 * PI / 3.0) *
                        std::exp(I_UNIT * (3.0 * sd.nu + 0.25 * PI)) /
                        std::sqrt(sd.nu);
            sum += term;
            if (std::abs(term) < 1e-16 * std::abs(sum) && j > 2) break;
        }
        out.push_back({t, std::abs(sum)});
    }
    return out;
}

std::vector<double> coefficient_s_grid(double b, double phi0, double cycles,
                                       int count) {
    std::vector<double> s(count);
    for (int m = 0; m < count; ++m) {
        double phi = phi0 + 2.0 * PI * cycles * double(m) / double(count - 1);
        double root = PI * b / (2.0 * phi);
        s[m] = root * root;
    }
    return s;
}

std::vector<Cplx> fit_coefficients(const std::vector<double>& s_samples,
                                   const std::vector<Cplx>& values, double b,
                                   int J) {
    const std::size_t M = s_samples.size();
    if (values.size() != M || M < std::size_t(2 * (J + 1)))
        throw ValidationError("fit_coefficients: not enough samples");
    const int n = J + 1;
    // normal equations A^H A x = A^H v with A_{mj} = exp(i j pi b / (2 sqrt(s_m)))
    std::vector<std::vector<Cplx>> ata(n, std::vector<Cplx>(n, Cplx{0.0, 0.0}));
    std::vector<Cplx> atv(n, Cplx{0.0, 0.0});
    for (std::size_t m = 0; m < M; ++m) {
        double phi = PI * b / (2.0 * std::sqrt(s_samples[m]));
        std::vector<Cplx> row(n);
        for (int j = 0; j < n; ++j) row[j] = std::exp(I_UNIT * (double(j) * phi));
        for (int i = 0; i < n; ++i) {
            atv[i] += std::conj(row[i]) * values[m];
            for (int j = 0; j < n; ++j) ata[i][j] += std::conj(row[i]) * row[j];
        }
    }
    // Cholesky-free: Gaussian elimination with partial pivoting (n is small).
    std::vector<Cplx> x = atv;
    for (int i = 0; i < n; ++i) {
        int piv = i;
        for (int r2 = i + 1; r2 < n; ++r2)
            if (std::abs(ata[r2][i]) > std::abs(ata[piv][i])) piv = r2;
        std::swap(ata[i], ata[piv]);
        std::swap(x[i], x[piv]);
        if (std::abs(ata[i][i]) < 1e-14)
            throw NumericError("fit_coefficients: ill-conditioned fit");
        for (int r2 = i + 1; r2 < n; ++r2) {
            Cplx f = ata[r2][i] / ata[i][i];
            for (int c2 = i; c2 < n; ++c2) ata[r2][c2] -= f * ata[i][c2];
            x[r2] -= f * x[i];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        for (int c2 = i + 1; c2 < n; ++c2) x[i] -= ata[i][c2] * x[c2];
        x[i] /= ata[i][i];
    }
    return x;
}

} // namespace ion
