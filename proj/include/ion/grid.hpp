#ifndef ION_GRID_HPP
#define ION_GRID_HPP

#include <vector>

#include "ion/types.hpp"

namespace ion {

// Radial grid in the u = r R representation. The node r = 0 is excluded
// (u(0) = 0 is the built-in boundary condition); nodes are strictly
// increasing and end at r_max.
struct RadialGrid {
    std::vector<double> r;     // node positions, r[0] > 0
    std::vector<double> w;     // trapezoid quadrature weights
    double a = 0.0;            // ball radius (a <= r_max)
    double r_abs = 0.0;        // absorber start (time-domain grids)
    std::size_t i_a = 0;       // index of the node at (or nearest) r = a

    std::size_t size() const { return r.size(); }

    // Uniform grid on (0, a] with spacing h = a / n.
    static RadialGrid uniform(double a, std::size_t n);

    // Propagation grid: fine spacing h_in on (0, r_core], coarse h_out on
    // (r_core, r_max], with a short geometric blend between the two.
    static RadialGrid propagation(double a, double r_core, double h_in,
                                  double r_max, double h_out, double r_abs);

    double dot_norm2(const std::vector<Cplx>& u) const; // sum w_j |u_j|^2
    Cplx inner(const std::vector<Cplx>& f, const std::vector<Cplx>& g) const;
};

} // namespace ion

#endif
