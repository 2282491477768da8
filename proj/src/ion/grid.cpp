#include "ion/grid.hpp"

#include <algorithm>
#include <cmath>

namespace ion {

namespace {

void fill_weights(RadialGrid& g) {
    // Trapezoid weights including the implicit u(0) = 0 node at r = 0.
    std::size_t n = g.r.size();
    g.w.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double left = (j == 0) ? 0.0 : g.r[j - 1];
        double right = (j + 1 < n) ? g.r[j + 1] : g.r[j];
        g.w[j] = 0.5 * (right - left);
    }
}

} // namespace

RadialGrid RadialGrid::uniform(double a, std::size_t n) {
    if (a <= 0.0 || n < 8) throw ValidationError("RadialGrid::uniform: bad parameters");
    RadialGrid g;
    g.a = a;
    g.r.resize(n);
    double h = a / double(n);
    for (std::size_t j = 0; j < n; ++j) g.r[j] = h * double(j + 1);
    g.i_a = n - 1;
    g.r_abs = a;
    fill_weights(g);
    return g;
}

RadialGrid RadialGrid::propagation(double a, double r_core, double h_in,
                                   double r_max, double h_out, double r_abs) {
    if (!(0 < a && a <= r_core && r_core < r_abs && r_abs < r_max))
        throw ValidationError("RadialGrid::propagation: need 0 < a <= r_core < r_abs < r_max");
    RadialGrid g;
    g.a = a;
    g.r_abs = r_abs;
    double r = 0.0, h = h_in;
    while (r < r_max - 0.5 * h) {
        r += h;
        g.r.push_back(r);
        if (r >= r_core && h < h_out) h = std::min(h_out, h * 1.08);
    }
    g.i_a = 0;
    for (std::size_t j = 0; j < g.r.size(); ++j)
        if (std::abs(g.r[j] - a) < std::abs(g.r[g.i_a] - a)) g.i_a = j;
    fill_weights(g);
    return g;
}

double RadialGrid::dot_norm2(const std::vector<Cplx>& u) const {
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += w[j] * std::norm(u[j]);
    return s;
}

Cplx RadialGrid::inner(const std::vector<Cplx>& f, const std::vector<Cplx>& g) const {
    Cplx s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += w[j] * std::conj(f[j]) * g[j];
    return s;
}

} // namespace ion
