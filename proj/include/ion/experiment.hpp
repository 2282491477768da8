#ifndef ION_EXPERIMENT_HPP
#define ION_EXPERIMENT_HPP

#include <string>
#include <vector>

#include "ion/config.hpp"

namespace ion {

struct SeriesInfo {
    std::string name;      // e.g. "pt_series"
    std::string csv_path;
    std::string plot_kind; // "decay-loglog" | "scan-linear" | "table"
};

struct ResultBundle {
    std::string out_dir;
    std::vector<SeriesInfo> series;
    std::vector<std::string> outputs; // all written files
};

// Dispatches cfg.kind to the module pipelines; writes CSV outputs, a manifest
// (config hash, per-file content hashes, wall time) and optional checkpoints
// under cfg.out_dir.
ResultBundle run_experiment(const ExperimentConfig& cfg,
                            const std::string& resume_path = "");

// Writes a self-contained Python plotting script referencing the bundle's CSV
// files; decay series get the -5/3 and -5/6 reference slopes. Returns the
// script path, or empty string when there was nothing to plot.
std::string emit_plot_script(const ResultBundle& bundle);

} // namespace ion

#endif
