/**
 * @file runner.hpp
 * @brief Builds families and states from an ExperimentSpec, runs its tasks and
 *        writes the artifacts (task reports, state CSVs, manifest).
 */

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "semiflow/chernoff.hpp"
#include "semiflow/config.hpp"
#include "semiflow/families_nonlinear.hpp"

namespace semiflow {

/// Environment variable holding the default output directory.
inline constexpr const char* kOutputDirEnv = "SEMIFLOW_OUT_DIR";

/// $SEMIFLOW_OUT_DIR when set and non-empty, else "semiflow_out".
std::filesystem::path default_output_dir();

/// --out, then the spec's output_dir, then default_output_dir().
std::filesystem::path resolve_output_dir(const ExperimentSpec& spec, const std::optional<std::filesystem::path>& cli_out);

GridFunction build_initial_grid(const ExperimentSpec& spec);
VectorState build_initial_vector(const ExperimentSpec& spec);

/// Throws ConfigError when the spec's parameters are rejected by a family constructor.
GeneratingFamily<GridFunction> build_grid_family(const ExperimentSpec& spec, const GridFunction& initial);
GeneratingFamily<VectorState> build_vector_family(const ExperimentSpec& spec);

/// Closed-form S(t)x where one is known for the spec's family and initial state.
std::optional<GridFunction> closed_form_grid(const ExperimentSpec& spec, double t);
std::optional<VectorState> closed_form_vector(const ExperimentSpec& spec, double t);

struct TaskOutcome {
    std::string type;
    std::string file;
    std::string status;  ///< pass | fail | error
    std::string message;
};

struct ArtifactEntry {
    std::string file;
    std::string sha256;
    std::size_t bytes = 0;
};

struct RunResult {
    std::string name;
    std::filesystem::path out_dir;
    std::vector<TaskOutcome> tasks;
    std::vector<ArtifactEntry> artifacts;
    bool passed = false;
};

/// Runs every task and writes `<task>.json`, `state_t<t>.csv` for evolve, and
/// `manifest.json` last. Task failures are recorded, not thrown; ConfigError
/// propagates. Output is byte-identical for identical spec and seed.
RunResult run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir);

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

/// "state_t0.5.csv" style file name for an evolve time.
std::string state_file_name(double t);

/// CSV of a vector state: header v1..vd and one row.
std::string to_csv(const VectorState& x);

}  // namespace semiflow
