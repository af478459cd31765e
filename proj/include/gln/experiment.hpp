#ifndef GLN_EXPERIMENT_HPP
#define GLN_EXPERIMENT_HPP

#include <functional>
#include <string>

#include "gln/config.hpp"

namespace gln {

using LogFn = std::function<void(const std::string&)>;

struct DatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Execute the experiment named by config["experiment"] and write the run
/// artifacts into out_dir:
///   config.txt      the configuration, verbatim
///   metrics.csv     one record per evaluation block (deterministic bytes)
///   metrics.jsonl   the same records as JSON lines
///   metadata.json   config + library version + seed + summary + timing
///   checkpoint.gln  model state
/// plus per-experiment artifacts (grid_fit.csv, trajectory.csv).
/// Throws ConfigError / DatasetError / std::runtime_error on failure.
void run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                    const LogFn& log = {});

/// Derive plain-text columnar plot files from a completed run directory.
void emit_plotdata(const std::string& run_dir, const LogFn& log = {});

}  // namespace gln

#endif  // GLN_EXPERIMENT_HPP
