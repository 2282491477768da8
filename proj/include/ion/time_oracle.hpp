#ifndef ION_TIME_ORACLE_HPP
#define ION_TIME_ORACLE_HPP

#include <string>
#include <vector>

#include "ion/config.hpp"
#include "ion/grid.hpp"
#include "ion/types.hpp"

namespace ion {

// Radial wavefunction in one angular channel, u(r) = r R(r).
struct ChannelWave {
    RadialGrid grid;
    std::vector<Cplx> u;
    int l = 0, m = 0;
    double t = 0.0;
    long step_index = 0;

    double norm2() const { return grid.dot_norm2(u); }
};

// Normalized 1s-like state u = N r e^{-b r / 2} on the grid (l = 0 only).
// Throws if the discrete energy misses -b^2/4 by more than 1e-3 relative.
ChannelWave ground_state(double b, const RadialGrid& grid);

// Same, smoothly truncated to vanish for r >= r_zero (quintic bridge from
// r_flat), then normalized; suitable as a compactly supported initial state.
ChannelWave truncated_ground_state(double b, const RadialGrid& grid,
                                   double r_flat, double r_zero);

std::vector<Cplx> make_initial_state(const ExperimentConfig& cfg,
                                     const RadialGrid& grid);

// Discrete channel energy <u|H|u> / <u|u> with H = -d2/dr2 + l(l+1)/r^2 - b/r.
double channel_energy(const ChannelWave& w, double b);

// Quartic absorber profile W(r) = W0 ((r - r_abs)/(r_max - r_abs))^4 for
// r > r_abs, else 0.
double absorber_W(double r, const RadialGrid& grid, double w0);

// One time-centered implicit (Crank-Nicolson) step of
//   i u_t = [-d2/dr2 + l(l+1)/r^2 - b/r + 2 Omega(r) sin(w(t+dt/2) - theta)
//            - i W(r)] u,
// with the absorber off when absorber_on is false.
void step(ChannelWave& w, double dt, const PhysicalConfig& phys,
          double absorber_w0, bool absorber_on);

// Integral of |u|^2 over [0, a].
double probability_ball(const ChannelWave& w, double a);

struct PropagationResult {
    std::vector<double> t;
    std::vector<double> P;
    ChannelWave final_state;
};

// Propagate to t_final, sampling P(t, B_a) every sample_every steps.
// If checkpoint_path is nonempty, a resumable snapshot is written after each
// sample; resuming continues bit-stably.
PropagationResult run(const ExperimentConfig& cfg, const RadialGrid& grid,
                      const std::vector<Cplx>& u0,
                      const std::string& checkpoint_path = "",
                      bool resume = false);

// Checkpoint IO: binary snapshot (header: grid hash, t, l, m, step index;
// payload: interleaved re/im doubles, little-endian).
void save_checkpoint(const std::string& path, const ChannelWave& w);
ChannelWave load_checkpoint(const std::string& path, const RadialGrid& grid);

} // namespace ion

#endif
