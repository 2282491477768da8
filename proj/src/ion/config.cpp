#include "ion/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ion {

using nlohmann::json;

double ForcingProfile::value(double r) const {
    if (r > 1.0) return 0.0;
    if (form == "const") return amplitude;
    if (form == "affine_sq") return amplitude * (1.0 + r) * (1.0 + r);
    throw ValidationError("ForcingProfile: unknown form '" + form + "'");
}

double ForcingProfile::d1(double r) const {
    if (r > 1.0) return 0.0;
    if (form == "const") return 0.0;
    if (form == "affine_sq") return 2.0 * amplitude * (1.0 + r);
    throw ValidationError("ForcingProfile: unknown form '" + form + "'");
}

double ForcingProfile::d2(double r) const {
    if (r > 1.0) return 0.0;
    if (form == "const") return 0.0;
    if (form == "affine_sq") return 2.0 * amplitude;
    throw ValidationError("ForcingProfile: unknown form '" + form + "'");
}

void PhysicalConfig::validate() const {
    if (b <= 0.0) throw ValidationError("physical.b must be > 0");
    if (omega <= 0.0) throw ValidationError("physical.omega must be > 0");
    if (l < 0 || std::abs(m) > l) throw ValidationError("physical: need |m| <= l, l >= 0");
    if (forcing.amplitude <= 0.0) throw ValidationError("forcing amplitude must be > 0");
    // Positivity on [0,1]; the named families are monotone so endpoints suffice.
    if (forcing.value(0.0) <= 0.0 || forcing.value(1.0) <= 0.0)
        throw ValidationError("forcing must be positive on [0,1]");
}

RegularizationParams RegularizationParams::defaults(const PhysicalConfig& phys) {
    RegularizationParams rp;
    rp.c = 4.0;
    rp.a = 2.0;
    rp.eps = phys.omega / 4.0;
    rp.p_c = 0.25 * phys.b * phys.b + 0.37 * phys.omega;
    return rp;
}

void RegularizationParams::validate(const PhysicalConfig& phys) const {
    if (c <= 0.0) throw ValidationError("regularization.c must be > 0");
    if (a <= 1.0) throw ValidationError("regularization.a must be > 1");
    if (!(eps > 0.0 && eps < 0.5 * phys.omega))
        throw ValidationError("regularization.eps must lie in (0, omega/2)");
    if (!(p_c > 0.25 * phys.b * phys.b))
        throw ValidationError("regularization.p_c must exceed b^2/4");
    double ratio = p_c / phys.omega;
    if (std::abs(ratio - std::round(ratio)) < 1e-9)
        throw ValidationError("regularization.p_c/omega must not be an integer");
}

void ExperimentConfig::validate() const {
    static const std::set<std::string> kinds = {
        "propagate", "floquet-solve", "wkb-check",
        "sphase-check", "greenfn-eval", "crosscheck"};
    if (!kinds.count(kind)) throw ValidationError("unknown experiment kind '" + kind + "'");
    physical.validate();
    regularization.validate(physical);
    if (solver.tol <= 0.0) throw ValidationError("solver.tol must be > 0");
    if (solver.n_sidebands < 1) throw ValidationError("solver.n_sidebands must be >= 1");
    if (solver.q_points < 8) throw ValidationError("solver.q_points must be >= 8");
    if (solver.dt <= 0.0) throw ValidationError("solver.dt must be > 0");
    if (solver.t_final <= 0.0) throw ValidationError("solver.t_final must be > 0");
    if (grid.h_in <= 0.0 || grid.h_out <= 0.0) throw ValidationError("grid spacings must be > 0");
    if (!(grid.r_core < grid.r_abs && grid.r_abs < grid.r_max))
        throw ValidationError("grid: need r_core < r_abs < r_max");
    if (regularization.a > grid.r_core + 1e-12)
        throw ValidationError("grid.r_core must cover the ball radius a");
    if (initial.form != "ground" && initial.form != "truncated_ground")
        throw ValidationError("initial.form must be 'ground' or 'truncated_ground'");
    if (initial.form == "truncated_ground" &&
        !(0.0 < initial.r_flat && initial.r_flat < initial.r_zero &&
          initial.r_zero < regularization.a))
        throw ValidationError("initial: need 0 < r_flat < r_zero < a");
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

ExperimentConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
    reject_unknown(j, {"schema", "kind", "physical", "regularization", "grid",
                       "solver", "initial", "out_dir", "seed"},
                   "config");
    ExperimentConfig cfg;
    get_if(j, "schema", cfg.schema);
    if (cfg.schema != 1) throw ValidationError("unsupported config schema version");
    get_if(j, "kind", cfg.kind);
    if (j.contains("physical")) {
        const json& p = j["physical"];
        reject_unknown(p, {"b", "omega", "theta", "l", "m", "forcing"}, "physical");
        get_if(p, "b", cfg.physical.b);
        get_if(p, "omega", cfg.physical.omega);
        get_if(p, "theta", cfg.physical.theta);
        get_if(p, "l", cfg.physical.l);
        get_if(p, "m", cfg.physical.m);
        if (p.contains("forcing")) {
            const json& f = p["forcing"];
            reject_unknown(f, {"form", "amplitude"}, "physical.forcing");
            get_if(f, "form", cfg.physical.forcing.form);
            get_if(f, "amplitude", cfg.physical.forcing.amplitude);
        }
    }
    cfg.regularization = RegularizationParams::defaults(cfg.physical);
    if (j.contains("regularization")) {
        const json& rp = j["regularization"];
        reject_unknown(rp, {"c", "a", "eps", "p_c"}, "regularization");
        get_if(rp, "c", cfg.regularization.c);
        get_if(rp, "a", cfg.regularization.a);
        get_if(rp, "eps", cfg.regularization.eps);
        get_if(rp, "p_c", cfg.regularization.p_c);
    }
    if (j.contains("grid")) {
        const json& g = j["grid"];
        reject_unknown(g, {"h_in", "r_core", "h_out", "r_max", "r_abs"}, "grid");
        get_if(g, "h_in", cfg.grid.h_in);
        get_if(g, "r_core", cfg.grid.r_core);
        get_if(g, "h_out", cfg.grid.h_out);
        get_if(g, "r_max", cfg.grid.r_max);
        get_if(g, "r_abs", cfg.grid.r_abs);
    }
    if (j.contains("solver")) {
        const json& s = j["solver"];
        reject_unknown(s, {"tol", "n_sidebands", "q_points", "q_cluster_ratio",
                           "dt", "t_final", "sample_every", "absorber_w0",
                           "threads"},
                       "solver");
        get_if(s, "tol", cfg.solver.tol);
        get_if(s, "n_sidebands", cfg.solver.n_sidebands);
        get_if(s, "q_points", cfg.solver.q_points);
        get_if(s, "q_cluster_ratio", cfg.solver.q_cluster_ratio);
        get_if(s, "dt", cfg.solver.dt);
        get_if(s, "t_final", cfg.solver.t_final);
        get_if(s, "sample_every", cfg.solver.sample_every);
        get_if(s, "absorber_w0", cfg.solver.absorber_w0);
        get_if(s, "threads", cfg.solver.threads);
    }
    if (j.contains("initial")) {
        const json& s = j["initial"];
        reject_unknown(s, {"form", "r_flat", "r_zero"}, "initial");
        get_if(s, "form", cfg.initial.form);
        get_if(s, "r_flat", cfg.initial.r_flat);
        get_if(s, "r_zero", cfg.initial.r_zero);
    }
    get_if(j, "out_dir", cfg.out_dir);
    get_if(j, "seed", cfg.seed);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config file not found: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["schema"] = cfg.schema;
    j["kind"] = cfg.kind;
    j["physical"] = {{"b", cfg.physical.b},
                     {"omega", cfg.physical.omega},
                     {"theta", cfg.physical.theta},
                     {"l", cfg.physical.l},
                     {"m", cfg.physical.m},
                     {"forcing",
                      {{"form", cfg.physical.forcing.form},
                       {"amplitude", cfg.physical.forcing.amplitude}}}};
    j["regularization"] = {{"c", cfg.regularization.c},
                           {"a", cfg.regularization.a},
                           {"eps", cfg.regularization.eps},
                           {"p_c", cfg.regularization.p_c}};
    j["grid"] = {{"h_in", cfg.grid.h_in},
                 {"r_core", cfg.grid.r_core},
                 {"h_out", cfg.grid.h_out},
                 {"r_max", cfg.grid.r_max},
                 {"r_abs", cfg.grid.r_abs}};
    j["solver"] = {{"tol", cfg.solver.tol},
                   {"n_sidebands", cfg.solver.n_sidebands},
                   {"q_points", cfg.solver.q_points},
                   {"q_cluster_ratio", cfg.solver.q_cluster_ratio},
                   {"dt", cfg.solver.dt},
                   {"t_final", cfg.solver.t_final},
                   {"sample_every", cfg.solver.sample_every},
                   {"absorber_w0", cfg.solver.absorber_w0},
                   {"threads", cfg.solver.threads}};
    j["initial"] = {{"form", cfg.initial.form},
                    {"r_flat", cfg.initial.r_flat},
                    {"r_zero", cfg.initial.r_zero}};
    j["out_dir"] = cfg.out_dir;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write config: " + path);
    out << config_to_json(cfg);
}

} // namespace ion
