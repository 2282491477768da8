#include "ion/time_oracle.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "ion/log.hpp"
#include "ion/manifest.hpp"

namespace ion {

namespace {

// Nonuniform 3-point second-difference coefficients at node j.
struct Stencil {
    double cm, cc, cp;
};

Stencil d2_stencil(const RadialGrid& g, std::size_t j) {
    double hm = (j == 0) ? g.r[0] : g.r[j] - g.r[j - 1];
    double hp = (j + 1 < g.size()) ? g.r[j + 1] - g.r[j] : hm;
    return {2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))};
}

double potential_static(const RadialGrid& g, std::size_t j, int l, double b) {
    double r = g.r[j];
    return double(l * (l + 1)) / (r * r) - b / r;
}

} // namespace

ChannelWave ground_state(double b, const RadialGrid& grid) {
    ChannelWave w;
    w.grid = grid;
    w.l = 0;
    w.m = 0;
    w.u.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
        w.u[j] = grid.r[j] * std::exp(-0.5 * b * grid.r[j]);
    double n2 = w.norm2();
    for (auto& z : w.u) z /= std::sqrt(n2);
    double e = channel_energy(w, b);
    double e_exact = -0.25 * b * b;
    if (std::abs(e - e_exact) > 1e-3 * std::abs(e_exact))
        throw NumericError("ground_state: grid too coarse, <H> = " + std::to_string(e));
    return w;
}

ChannelWave truncated_ground_state(double b, const RadialGrid& grid,
                                   double r_flat, double r_zero) {
    if (!(0.0 < r_flat && r_flat < r_zero))
        throw ValidationError("truncated_ground_state: need 0 < r_flat < r_zero");
    ChannelWave w;
    w.grid = grid;
    w.l = 0;
    w.m = 0;
    w.u.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double r = grid.r[j];
        double cut = 1.0;
        if (r >= r_zero) cut = 0.0;
        else if (r > r_flat) {
            double s = (r - r_flat) / (r_zero - r_flat);
            cut = 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
        }
        w.u[j] = r * std::exp(-0.5 * b * r) * cut;
    }
    double n2 = w.norm2();
    for (auto& z : w.u) z /= std::sqrt(n2);
    return w;
}

std::vector<Cplx> make_initial_state(const ExperimentConfig& cfg,
                                     const RadialGrid& grid) {
    if (cfg.initial.form == "ground")
        return ground_state(cfg.physical.b, grid).u;
    return truncated_ground_state(cfg.physical.b, grid, cfg.initial.r_flat,
                                  cfg.initial.r_zero)
        .u;
}

double channel_energy(const ChannelWave& w, double b) {
    const RadialGrid& g = w.grid;
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        Stencil s = d2_stencil(g, j);
        Cplx um = (j > 0) ? w.u[j - 1] : Cplx{0.0, 0.0};
        Cplx up = (j + 1 < g.size()) ? w.u[j + 1] : Cplx{0.0, 0.0};
        Cplx hu = -(s.cm * um + s.cc * w.u[j] + s.cp * up) +
                  potential_static(g, j, w.l, b) * w.u[j];
        num += (std::conj(w.u[j]) * hu * g.w[j]).real();
        den += std::norm(w.u[j]) * g.w[j];
    }
    return num / den;
}

double absorber_W(double r, const RadialGrid& grid, double w0) {
    if (r <= grid.r_abs) return 0.0;
    double s = (r - grid.r_abs) / (grid.r.back() - grid.r_abs);
    return w0 * s * s * s * s;
}

void step(ChannelWave& w, double dt, const PhysicalConfig& phys,
          double absorber_w0, bool absorber_on) {
    const RadialGrid& g = w.grid;
    std::size_t n = g.size();
    double tm = w.t + 0.5 * dt;
    double drive = 2.0 * std::sin(phys.omega * tm - phys.theta);
    // (I + i dt/2 H) u' = (I - i dt/2 H) u
    std::vector<Cplx> sub(n), diag(n), sup(n), rhs(n);
    Cplx idt2 = I_UNIT * (0.5 * dt);
    for (std::size_t j = 0; j < n; ++j) {
        Stencil s = d2_stencil(g, j);
        Cplx v = potential_static(g, j, w.l, phys.b) +
                 drive * phys.forcing.value(g.r[j]);
        if (absorber_on) v -= I_UNIT * absorber_W(g.r[j], g, absorber_w0);
        Cplx hd = -s.cc + v; // diagonal of H
        Cplx hm = -s.cm, hp = -s.cp;
        diag[j] = 1.0 + idt2 * hd;
        sub[j] = (j > 0) ? idt2 * hm : Cplx{0.0, 0.0};
        sup[j] = (j + 1 < n) ? idt2 * hp : Cplx{0.0, 0.0};
        Cplx um = (j > 0) ? w.u[j - 1] : Cplx{0.0, 0.0};
        Cplx up = (j + 1 < n) ? w.u[j + 1] : Cplx{0.0, 0.0};
        rhs[j] = (1.0 - idt2 * hd) * w.u[j] - idt2 * (hm * um + hp * up);
    }
    // Thomas solve in place
    std::vector<Cplx> ch(n);
    ch[0] = sup[0] / diag[0];
    rhs[0] = rhs[0] / diag[0];
    for (std::size_t j = 1; j < n; ++j) {
        Cplx d = diag[j] - sub[j] * ch[j - 1];
        ch[j] = (j + 1 < n) ? sup[j] / d : Cplx{0.0, 0.0};
        rhs[j] = (rhs[j] - sub[j] * rhs[j - 1]) / d;
    }
    for (std::size_t j = n - 1; j-- > 0;) rhs[j] -= ch[j] * rhs[j + 1];
    w.u = std::move(rhs);
    w.t += dt;
    w.step_index += 1;
}

double probability_ball(const ChannelWave& w, double a) {
    const RadialGrid& g = w.grid;
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        if (g.r[j] > a + 1e-12) break;
        double weight = g.w[j];
        // trim the last cell if it straddles a
        if (j + 1 < g.size() && g.r[j + 1] > a) {
            double left = (j == 0) ? 0.0 : g.r[j - 1];
            weight = 0.5 * (a - left);
        }
        s += weight * std::norm(w.u[j]);
    }
    return s;
}

// --- checkpoints ---------------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'I', 'O', 'N', 'C', 'K', 'P', 'T', '1'};
}

void save_checkpoint(const std::string& path, const ChannelWave& w) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("save_checkpoint: cannot open " + path);
    out.write(kMagic, 8);
    std::uint64_t grid_hash = fnv1a_bytes(w.grid.r.data(), w.grid.r.size() * sizeof(double));
    std::uint64_t nn = w.u.size();
    std::int32_t l = w.l, m = w.m;
    double t = w.t;
    std::int64_t si = w.step_index;
    out.write(reinterpret_cast<const char*>(&grid_hash), 8);
    out.write(reinterpret_cast<const char*>(&nn), 8);
    out.write(reinterpret_cast<const char*>(&l), 4);
    out.write(reinterpret_cast<const char*>(&m), 4);
    out.write(reinterpret_cast<const char*>(&t), 8);
    out.write(reinterpret_cast<const char*>(&si), 8);
    for (const Cplx& z : w.u) {
        double re = z.real(), im = z.imag();
        out.write(reinterpret_cast<const char*>(&re), 8);
        out.write(reinterpret_cast<const char*>(&im), 8);
    }
    if (!out) throw Error("save_checkpoint: write failed");
}

ChannelWave load_checkpoint(const std::string& path, const RadialGrid& grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ResumeError("load_checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw ResumeError("load_checkpoint: bad magic");
    std::uint64_t grid_hash, nn;
    std::int32_t l, m;
    double t;
    std::int64_t si;
    in.read(reinterpret_cast<char*>(&grid_hash), 8);
    in.read(reinterpret_cast<char*>(&nn), 8);
    in.read(reinterpret_cast<char*>(&l), 4);
    in.read(reinterpret_cast<char*>(&m), 4);
    in.read(reinterpret_cast<char*>(&t), 8);
    in.read(reinterpret_cast<char*>(&si), 8);
    std::uint64_t expect =
        fnv1a_bytes(grid.r.data(), grid.r.size() * sizeof(double));
    if (grid_hash != expect || nn != grid.size())
        throw ResumeError("load_checkpoint: grid mismatch");
    ChannelWave w;
    w.grid = grid;
    w.l = l;
    w.m = m;
    w.t = t;
    w.step_index = si;
    w.u.resize(nn);
    for (auto& z : w.u) {
        double re, im;
        in.read(reinterpret_cast<char*>(&re), 8);
        in.read(reinterpret_cast<char*>(&im), 8);
        z = Cplx{re, im};
    }
    if (!in) throw ResumeError("load_checkpoint: truncated payload");
    return w;
}

PropagationResult run(const ExperimentConfig& cfg, const RadialGrid& grid,
                      const std::vector<Cplx>& u0,
                      const std::string& checkpoint_path, bool resume) {
    ChannelWave w;
    if (resume) {
        w = load_checkpoint(checkpoint_path, grid);
        if (w.l != cfg.physical.l) throw ResumeError("run: channel mismatch on resume");
    } else {
        w.grid = grid;
        w.u = u0;
        w.l = cfg.physical.l;
        w.m = cfg.physical.m;
    }
    double dt = cfg.solver.dt;
    long total_steps = std::lround(cfg.solver.t_final / dt);
    PropagationResult out;
    out.t.push_back(w.t);
    out.P.push_back(probability_ball(w, cfg.regularization.a));
    long next_log = 0;
    for (long s = w.step_index; s < total_steps; ++s) {
        step(w, dt, cfg.physical, cfg.solver.absorber_w0, true);
        if (w.step_index % cfg.solver.sample_every == 0 || s + 1 == total_steps) {
            out.t.push_back(w.t);
            out.P.push_back(probability_ball(w, cfg.regularization.a));
            if (!checkpoint_path.empty()) save_checkpoint(checkpoint_path, w);
            if (w.step_index >= next_log) {
                log_info("propagate t=%.1f P=%.3e", w.t, out.P.back());
                next_log += total_steps / 20 + 1;
            }
        }
    }
    out.final_state = std::move(w);
    return out;
}

} // namespace ion
