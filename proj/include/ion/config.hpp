#ifndef ION_CONFIG_HPP
#define ION_CONFIG_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ion/types.hpp"

namespace ion {

// Forcing amplitude profile: smooth, positive on [0,1], zero for r > 1,
// with Omega(1-) != 0. Named families keep derivatives analytic.
struct ForcingProfile {
    std::string form = "const"; // "const" | "affine_sq"
    double amplitude = 0.5;

    double value(double r) const;  // Omega(r), zero for r > 1
    double d1(double r) const;     // Omega'(r) inside [0,1]
    double d2(double r) const;     // Omega''(r) inside [0,1]
};

struct PhysicalConfig {
    double b = 1.0;      // Coulomb coupling
    double omega = 1.0;  // forcing frequency
    double theta = 0.0;  // forcing phase
    int l = 0, m = 0;    // angular channel
    ForcingProfile forcing;

    void validate() const;
};

struct RegularizationParams {
    double c = 4.0;    // absorber strength (beta window)
    double a = 2.0;    // ball radius
    double eps = 0.25; // window half-depth, < omega/2
    double p_c = 0.62; // window top, > b^2/4, p_c/omega not an integer

    void validate(const PhysicalConfig& phys) const;
    static RegularizationParams defaults(const PhysicalConfig& phys);
};

struct GridSpec {
    double h_in = 1.0 / 400.0; // spacing inside [0, r_core]
    double r_core = 2.0;
    double h_out = 1.0 / 20.0; // spacing outside, propagation only
    double r_max = 200.0;
    double r_abs = 150.0;
};

struct SolverParams {
    double tol = 1e-8;        // iterative solve residual
    int n_sidebands = 24;     // truncation |n| <= n_sidebands
    int q_points = 512;       // inversion grid per period
    double q_cluster_ratio = 1.2;
    double dt = 0.005;        // propagation step
    double t_final = 500.0;
    int sample_every = 100;   // steps between P(t) samples
    double absorber_w0 = 0.5; // quartic absorber strength
    int threads = 1;
};

struct InitialState {
    std::string form = "truncated_ground"; // "ground" | "truncated_ground"
    double r_flat = 1.2;                   // cutoff starts here
    double r_zero = 1.8;                   // support ends here
};

struct ExperimentConfig {
    int schema = 1;
    std::string kind = "propagate";
    // propagate | floquet-solve | wkb-check | sphase-check | greenfn-eval | crosscheck
    PhysicalConfig physical;
    RegularizationParams regularization;
    GridSpec grid;
    SolverParams solver;
    InitialState initial;
    std::string out_dir = "out";
    std::uint64_t seed = 20180708;

    void validate() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);
void save_config(const ExperimentConfig& cfg, const std::string& path);

} // namespace ion

#endif
