#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "ion/experiment.hpp"
#include "ion/log.hpp"
#include "ion/types.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ion - numerical lab for ionization of periodically forced Coulomb systems"};
    app.require_subcommand(1);

    const char* kinds[] = {"propagate", "floquet-solve", "wkb-check",
                           "sphase-check", "greenfn-eval", "crosscheck"};
    struct Args {
        std::string config, out, resume;
        int threads = 0;
    } args;
    for (const char* k : kinds) {
        CLI::App* sub = app.add_subcommand(k, std::string("run the ") + k + " experiment");
        sub->add_option("--config", args.config, "JSON config file");
        sub->add_option("--out", args.out, "output directory override");
        sub->add_option("--resume", args.resume, "resume from checkpoint");
        sub->add_option("--threads", args.threads, "worker threads");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        ion::ExperimentConfig cfg;
        if (!args.config.empty()) cfg = ion::load_config(args.config);
        cfg.kind = app.get_subcommands()[0]->get_name();
        if (!args.out.empty()) cfg.out_dir = args.out;
        if (args.threads > 0) cfg.solver.threads = args.threads;
        cfg.validate();
        ion::ResultBundle b = ion::run_experiment(cfg, args.resume);
        std::printf("wrote %zu outputs to %s\n", b.outputs.size(), b.out_dir.c_str());
        return 0;
    } catch (const ion::ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const ion::ResumeError& e) {
        std::fprintf(stderr, "resume error: %s\n", e.what());
        return 4;
    } catch (const ion::NumericError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
