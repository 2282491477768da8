#include "ion/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "ion/csv.hpp"
#include "ion/floquet.hpp"
#include "ion/green.hpp"
#include "ion/log.hpp"
#include "ion/manifest.hpp"
#include "ion/sphase.hpp"
#include "ion/time_oracle.hpp"
#include "ion/wkb.hpp"

namespace ion {

namespace {

namespace fs = std::filesystem;

RadialGrid make_ball_grid(const ExperimentConfig& cfg) {
    std::size_t n = std::lround(cfg.regularization.a / cfg.grid.h_in);
    return RadialGrid::uniform(cfg.regularization.a, n);
}

RadialGrid make_prop_grid(const ExperimentConfig& cfg) {
    return RadialGrid::propagation(cfg.regularization.a, cfg.grid.r_core,
                                   cfg.grid.h_in, cfg.grid.r_max,
                                   cfg.grid.h_out, cfg.grid.r_abs);
}

void do_propagate(const ExperimentConfig& cfg, ResultBundle& b,
                  const std::string& resume_path) {
    RadialGrid grid = make_prop_grid(cfg);
    std::vector<Cplx> u0 = make_initial_state(cfg, grid);
    std::string ckpt = b.out_dir + "/propagate.ckpt";
    bool resume = !resume_path.empty();
    if (resume) ckpt = resume_path;
    PropagationResult res = run(cfg, grid, u0, ckpt, resume);
    std::string path = b.out_dir + "/pt_series.csv";
    CsvWriter csv(path, {"t", "P"});
    for (std::size_t i = 0; i < res.t.size(); ++i) {
        csv.put(res.t[i]);
        csv.put(res.P[i]);
        csv.end_row();
    }
    b.outputs.push_back(path);
    b.outputs.push_back(ckpt);
    b.series.push_back({"pt_series", path, "decay-loglog"});
    // late-window fit over the last decade
    double t_hi = res.t.back(), t_lo = std::max(res.t.front() + 1.0, t_hi / 10.0);
    try {
        SlopeFit fit = decay_exponent_fit(res.t, res.P, t_lo, t_hi);
        std::string fpath = b.out_dir + "/pt_fit.csv";
        CsvWriter fcsv(fpath, {"t_lo", "t_hi", "slope", "stderr", "n"});
        fcsv.put(t_lo);
        fcsv.put(t_hi);
        fcsv.put(fit.slope);
        fcsv.put(fit.stderr_slope);
        fcsv.put(fit.n_points);
        fcsv.end_row();
        b.outputs.push_back(fpath);
        b.series.push_back({"pt_fit", fpath, "table"});
    } catch (const Error& e) {
        log_info("propagate: fit skipped: %s", e.what());
    }
}

std::vector<double> default_t_grid(double lo, double hi, int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i)
        t[i] = lo * std::pow(hi / lo, double(i) / double(n - 1));
    return t;
}

void do_floquet(const ExperimentConfig& cfg, ResultBundle& b) {
    RadialGrid grid = make_ball_grid(cfg);
    std::vector<Cplx> u0 = make_initial_state(cfg, grid);
    std::vector<double> tg = default_t_grid(5.0, 50.0, 24);
    InverseLaplaceResult inv = inverse_laplace_P(
        tg, u0, cfg.physical, cfg.regularization, grid, cfg.solver);
    std::string path = b.out_dir + "/floquet_pt.csv";
    {
        CsvWriter csv(path, {"t", "P"});
        for (std::size_t i = 0; i < inv.t.size(); ++i) {
            csv.put(inv.t[i]);
            csv.put(inv.P[i]);
            csv.end_row();
        }
    }
    b.outputs.push_back(path);
    b.series.push_back({"floquet_pt", path, "decay-loglog"});
    std::string qpath = b.out_dir + "/floquet_q.csv";
    {
        CsvWriter csv(qpath, {"q", "field_norm"});
        for (std::size_t i = 0; i < inv.q.size(); ++i) {
            csv.put(inv.q[i]);
            csv.put(inv.field_norm[i]);
            csv.end_row();
        }
    }
    b.outputs.push_back(qpath);
    // sigma_min scan over one period strip
    int n_scan = 64;
    std::vector<Cplx> p1s(n_scan);
    for (int i = 0; i < n_scan; ++i)
        p1s[i] = I_UNIT * (cfg.physical.omega * (double(i) + 0.5) / double(n_scan));
    std::vector<ScanRecord> recs = min_singval_scan(
        p1s, cfg.physical, cfg.regularization, grid, cfg.solver);
    std::string spath = b.out_dir + "/sigma_scan.csv";
    {
        CsvWriter csv(spath, {"im_p1", "sigma_min", "min_pivot", "pole_flag"});
        for (const auto& r : recs) {
            csv.put(r.p1.imag());
            csv.put(r.sigma_min);
            csv.put(r.min_pivot);
            csv.put(int(r.pole_flag));
            csv.end_row();
        }
    }
    b.outputs.push_back(spath);
    b.series.push_back({"sigma_scan", spath, "scan-linear"});
}

void do_crosscheck(const ExperimentConfig& cfg, ResultBundle& b) {
    // time-domain route
    RadialGrid pgrid = make_prop_grid(cfg);
    std::vector<Cplx> u0p = make_initial_state(cfg, pgrid);
    ExperimentConfig tcfg = cfg;
    tcfg.solver.t_final = 50.0;
    PropagationResult tres = run(tcfg, pgrid, u0p, "", false);
    // Laplace route on the matching t samples in [5, 50]
    std::vector<double> tg;
    for (std::size_t i = 0; i < tres.t.size(); ++i)
        if (tres.t[i] >= 5.0 && tres.t[i] <= 50.0 && tg.size() < 40 &&
            (tg.empty() || tres.t[i] - tg.back() > 1.0))
            tg.push_back(tres.t[i]);
    RadialGrid bgrid = make_ball_grid(cfg);
    std::vector<Cplx> u0b = make_initial_state(cfg, bgrid);
    InverseLaplaceResult inv = inverse_laplace_P(
        tg, u0b, cfg.physical, cfg.regularization, bgrid, cfg.solver);
    std::string path = b.out_dir + "/crosscheck.csv";
    CsvWriter csv(path, {"t", "P_time", "P_floquet", "rel_diff"});
    double worst = 0.0;
    for (std::size_t i = 0; i < tg.size(); ++i) {
        // locate the time-domain sample
        double pt = 0.0;
        for (std::size_t j = 0; j < tres.t.size(); ++j)
            if (std::abs(tres.t[j] - tg[i]) < 1e-9) pt = tres.P[j];
        double rd = std::abs(pt - inv.P[i]) / std::max(pt, 1e-300);
        worst = std::max(worst, rd);
        csv.put(tg[i]);
        csv.put(pt);
        csv.put(inv.P[i]);
        csv.put(rd);
        csv.end_row();
    }
    log_info("crosscheck: worst relative difference %.3f", worst);
    b.outputs.push_back(path);
    b.series.push_back({"crosscheck", path, "decay-loglog"});
}

void do_wkb(const ExperimentConfig& cfg, ResultBundle& b) {
    WKBFrame frame = WKBFrame::make(cfg.physical.forcing, cfg.physical.omega,
                                    cfg.physical.b, cfg.physical.l, 0, 0, 0.0);
    int K = 40;
    ChainResult chain = chain_solve(K, frame, 1e-3);
    std::string path = b.out_dir + "/wkb_k.csv";
    CsvWriter csv(path, {"k", "h1", "sup_h_minus_1", "sup_jk", "A1_err_k2",
                         "Hk_norm_k2"});
    double L = 6.0;
    for (int k = 4; k <= K; k += 4) {
        auto hk = std::make_shared<HProfile>(solve_H(k, frame));
        auto hkm1 = std::make_shared<HProfile>(solve_H(k - 1, frame));
        MkProfile mk = make_mk(k, frame, hk);
        // sample h_k on zeta >= L
        std::vector<double> rpts;
        for (double r = std::min(1.0 - 1e-3, L / (frame.alpha * k)); r < 0.96;
             r += 0.02)
            rpts.push_back(r);
        std::vector<double> h = h_k_extract(chain, mk, rpts, k);
        double sup = 0.0;
        for (double v : h) sup = std::max(sup, std::abs(v - 1.0));
        double supj = 0.0;
        for (double r = 0.05; r < 1.0; r += 0.05)
            supj = std::max(supj, std::abs(j_k_eval(k, r, frame, *hk, *hkm1).value));
        AkHkOps ops = make_ops(k, frame);
        auto one = [](double) { return 1.0; };
        double a1 = 0.0, hke = 0.0;
        for (double r : {0.2, 0.5, 0.8}) {
            a1 = std::max(a1, std::abs(ops.apply_A(one, r) - 1.0));
            hke = std::max(hke, std::abs(ops.apply_H(one, r)));
        }
        csv.put(k);
        csv.put(chain.h1(k));
        csv.put(sup);
        csv.put(supj);
        csv.put(a1 * k * k);
        csv.put(hke * k * k);
        csv.end_row();
    }
    b.outputs.push_back(path);
    b.series.push_back({"wkb_k", path, "table"});
}

void do_sphase(const ExperimentConfig& cfg, ResultBundle& b) {
    CoeffModel model = CoeffModel::geometric(1.0, 40);
    std::vector<double> tg = default_t_grid(1e2, 1e5, 60);
    auto series = decay_series(cfg.physical.b, model, tg);
    std::string path = b.out_dir + "/decay_series.csv";
    {
        CsvWriter csv(path, {"t", "amplitude"});
        for (const auto& p : series) {
            csv.put(p.t);
            csv.put(p.amplitude);
            csv.end_row();
        }
    }
    b.outputs.push_back(path);
    b.series.push_back({"decay_series", path, "decay-loglog"});
    std::vector<double> ts, Ps;
    for (const auto& p : series) {
        ts.push_back(p.t);
        Ps.push_back(p.amplitude);
    }
    SlopeFit fit = decay_exponent_fit(ts, Ps, 1e3, 1e5);
    std::string fpath = b.out_dir + "/decay_fit.csv";
    {
        CsvWriter csv(fpath, {"slope", "stderr", "n"});
        csv.put(fit.slope);
        csv.put(fit.stderr_slope);
        csv.put(fit.n_points);
        csv.end_row();
    }
    b.outputs.push_back(fpath);
    // oracle vs saddle approximation table
    std::string opath = b.out_dir + "/saddle_vs_oracle.csv";
    {
        CsvWriter csv(opath, {"t", "nu", "oracle_re", "oracle_im", "approx_re",
                              "approx_im", "norm_err"});
        for (double t : default_t_grid(1e2, 1e5, 12)) {
            OscIntSpec spec{0, PI * cfg.physical.b / 2.0, 1.0, t};
            ComplexEval qr = osc_quadrature(spec);
            SaddleApprox ap = osc_saddle_approx(spec);
            SaddleData sd = saddle(spec.d, t);
            double nerr = std::abs(qr.value - ap.value) * sd.nu /
                          std::pow(sd.s0, 1.0 + 0.5 * spec.l);
            csv.put(t);
            csv.put(sd.nu);
            csv.put(qr.value.real());
            csv.put(qr.value.imag());
            csv.put(ap.value.real());
            csv.put(ap.value.imag());
            csv.put(nerr);
            csv.end_row();
        }
    }
    b.outputs.push_back(opath);
}

void do_green(const ExperimentConfig& cfg, ResultBundle& b) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    auto rand_vec = [&]() {
        Vec3 v{ud(rng), ud(rng), ud(rng)};
        return v;
    };
    std::string path = b.out_dir + "/green_residual.csv";
    CsvWriter csv(path, {"p_re", "p_im", "x1", "x2", "x3", "rel_residual"});
    std::vector<Cplx> ps = {Cplx{1.0, 0.0}, Cplx{1.0, 1.0}, Cplx{0.0, 0.5}};
    for (Cplx p : ps) {
        Cplx k = branch_k(p);
        for (int trial = 0; trial < 7; ++trial) {
            Vec3 x = rand_vec(), xp = rand_vec();
            double d2 = 0;
            for (int i = 0; i < 3; ++i) d2 += (x[i] - xp[i]) * (x[i] - xp[i]);
            if (d2 < 0.25) {
                --trial;
                continue;
            }
            double h = 0.006;
            auto G = [&](const Vec3& xx) {
                return green_full(xx, xp, k, cfg.physical.b).value;
            };
            Cplx lap = 0.0;
            Cplx g0 = G(x);
            for (int axis = 0; axis < 3; ++axis) {
                Vec3 xm = x, xq = x;
                xm[axis] -= h;
                xq[axis] += h;
                lap += G(xq) - 2.0 * g0 + G(xm);
            }
            lap /= h * h;
            double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
            Cplx resid = -lap - (cfg.physical.b / r) * g0 - I_UNIT * p * g0;
            double scale = std::abs(lap) + std::abs(cfg.physical.b / r * g0) +
                           std::abs(p * g0);
            csv.put(p.real());
            csv.put(p.imag());
            csv.put(x[0]);
            csv.put(x[1]);
            csv.put(x[2]);
            csv.put(std::abs(resid) / scale);
            csv.end_row();
        }
    }
    b.outputs.push_back(path);
}

} // namespace

ResultBundle run_experiment(const ExperimentConfig& cfg,
                            const std::string& resume_path) {
    cfg.validate();
    auto t0 = std::chrono::steady_clock::now();
    ResultBundle b;
    b.out_dir = cfg.out_dir;
    fs::create_directories(cfg.out_dir);
    std::string cfg_json = config_to_json(cfg);
    {
        std::ofstream out(cfg.out_dir + "/config.json", std::ios::binary);
        out << cfg_json;
        b.outputs.push_back(cfg.out_dir + "/config.json");
    }
    if (cfg.kind == "propagate") do_propagate(cfg, b, resume_path);
    else if (cfg.kind == "floquet-solve") do_floquet(cfg, b);
    else if (cfg.kind == "crosscheck") do_crosscheck(cfg, b);
    else if (cfg.kind == "wkb-check") do_wkb(cfg, b);
    else if (cfg.kind == "sphase-check") do_sphase(cfg, b);
    else if (cfg.kind == "greenfn-eval") do_green(cfg, b);
    else throw ValidationError("run_experiment: unknown kind " + cfg.kind);
    std::string plot = emit_plot_script(b);
    if (!plot.empty()) b.outputs.push_back(plot);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(cfg.out_dir, cfg_json, b.outputs, wall);
    return b;
}

std::string emit_plot_script(const ResultBundle& bundle) {
    bool any = false;
    for (const auto& s : bundle.series)
        if (s.plot_kind != "table") any = true;
    if (!any) {
        log_info("emit_plot_script: no plottable series, skipped");
        return "";
    }
    std::string path = bundle.out_dir + "/plot.py";
    std::ofstream out(path, std::ios::binary);
    out << "#!/usr/bin/env python3\n"
           "import csv, math\n"
           "import matplotlib\n"
           "matplotlib.use('Agg')\n"
           "import matplotlib.pyplot as plt\n\n"
           "def load(path):\n"
           "    with open(path) as f:\n"
           "        rows = list(csv.DictReader(f))\n"
           "    return rows\n\n";
    int fig = 0;
    for (const auto& s : bundle.series) {
        if (s.plot_kind == "decay-loglog") {
            out << "rows = load('" << s.csv_path << "')\n"
                << "cols = rows[0].keys()\n"
                << "xk = 't'\n"
                << "yk = [c for c in cols if c != 't'][0]\n"
                << "x = [float(r[xk]) for r in rows]\n"
                << "y = [abs(float(r[yk])) for r in rows]\n"
                << "plt.figure(" << fig << ")\n"
                << "plt.loglog(x, y, '.-', label='" << s.name << "')\n"
                << "x0, y0 = x[len(x)//2], max(y[len(y)//2], 1e-300)\n"
                << "plt.loglog(x, [y0*(xx/x0)**(-5.0/3.0) for xx in x], '--', "
                   "label='slope -5/3')\n"
                << "plt.loglog(x, [y0*(xx/x0)**(-5.0/6.0) for xx in x], ':', "
                   "label='slope -5/6')\n"
                << "plt.xlabel('t'); plt.legend()\n"
                << "plt.savefig('" << bundle.out_dir << "/" << s.name << ".png', dpi=120)\n\n";
            ++fig;
        } else if (s.plot_kind == "scan-linear") {
            out << "rows = load('" << s.csv_path << "')\n"
                << "x = [float(r['im_p1']) for r in rows]\n"
                << "y = [float(r['sigma_min']) for r in rows]\n"
                << "plt.figure(" << fig << ")\n"
                << "plt.plot(x, y, '.-')\n"
                << "plt.xlabel('Im p1'); plt.ylabel('sigma_min')\n"
                << "plt.ylim(bottom=0)\n"
                << "plt.savefig('" << bundle.out_dir << "/" << s.name << ".png', dpi=120)\n\n";
            ++fig;
        }
    }
    return path;
}

} // namespace ion
