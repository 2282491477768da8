#include "ion/series.hpp"

#include <cmath>
#include <stdexcept>

namespace ion {
namespace series {

S mul(const S& a, const S& b, std::size_t n) {
    S c(n, 0.0);
    for (std::size_t i = 0; i < a.size() && i < n; ++i) {
        if (a[i] == 0.0) continue;
        std::size_t jmax = std::min(b.size(), n - i);
        for (std::size_t j = 0; j < jmax; ++j) c[i + j] += a[i] * b[j];
    }
    return c;
}

S add(const S& a, const S& b) {
    S c(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) c[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) c[i] += b[i];
    return c;
}

S scal(double c, const S& a) {
    S r = a;
    for (auto& v : r) v *= c;
    return r;
}

S recip(const S& a, std::size_t n) {
    if (a.empty() || a[0] == 0.0) throw std::invalid_argument("series::recip: a[0]=0");
    S r(n, 0.0);
    r[0] = 1.0 / a[0];
    for (std::size_t m = 1; m < n; ++m) {
        double s = 0.0;
        for (std::size_t j = 1; j <= m && j < a.size(); ++j) s += a[j] * r[m - j];
        r[m] = -s / a[0];
    }
    return r;
}

S compose(const S& a, const S& b, std::size_t n) {
    if (!b.empty() && b[0] != 0.0) throw std::invalid_argument("series::compose: b[0]!=0");
    // Horner on truncated series.
    S r(1, 0.0);
    for (std::size_t i = a.size(); i-- > 0;) {
        r = mul(r, b, n);
        if (r.empty()) r.resize(1, 0.0);
        r[0] += a[i];
        r.resize(n, 0.0);
    }
    return r;
}

S revert(const S& a, std::size_t n) {
    if (a.size() < 2 || a[0] != 0.0 || a[1] == 0.0)
        throw std::invalid_argument("series::revert: need a[0]=0, a[1]!=0");
    // Newton iteration on g with a(g(y)) = y.
    S g(2, 0.0);
    g[1] = 1.0 / a[1];
    std::size_t m = 2;
    while (m < n) {
        m = std::min(n, 2 * m);
        S ag = compose(a, g, m);      // should equal y
        ag[1] -= 1.0;                 // residual
        S da = diff(a);
        S dag = compose(da, g, m);
        S corr = mul(ag, recip(dag, m), m);
        g.resize(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) g[i] -= (i < corr.size() ? corr[i] : 0.0);
    }
    g.resize(n, 0.0);
    return g;
}

S diff(const S& a) {
    if (a.size() <= 1) return S(1, 0.0);
    S r(a.size() - 1);
    for (std::size_t i = 1; i < a.size(); ++i) r[i - 1] = a[i] * double(i);
    return r;
}

S integ(const S& a) {
    S r(a.size() + 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) r[i + 1] = a[i] / double(i + 1);
    return r;
}

S pow(const S& a, double p, std::size_t n) {
    if (a.empty() || a[0] <= 0.0) throw std::invalid_argument("series::pow: a[0]<=0");
    // y = a^p solves y' a = p a' y.
    S r(n, 0.0);
    r[0] = std::pow(a[0], p);
    for (std::size_t m = 1; m < n; ++m) {
        // m a[0] r[m] = sum_{j=1..m} (p j - (m - j)) a[j] r[m-j]
        double s = 0.0;
        for (std::size_t j = 1; j <= m; ++j) {
            double aj = j < a.size() ? a[j] : 0.0;
            s += (p * double(j) - double(m - j)) * aj * r[m - j];
        }
        r[m] = s / (double(m) * a[0]);
    }
    return r;
}

double eval(const S& a, double x) {
    double r = 0.0;
    for (std::size_t i = a.size(); i-- > 0;) r = r * x + a[i];
    return r;
}

} // namespace series
} // namespace ion
