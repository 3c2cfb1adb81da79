/**
 * @file config.hpp
 * @brief JSON experiment specification: parsing with field-path errors,
 *        default filling and canonical serialization.
 *
 * parse_config_json(serialize_config(spec)) == spec for every valid spec.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "semiflow/families_linear.hpp"
#include "semiflow/state_space.hpp"

namespace semiflow {

/// Schema violation; `path()` names the offending field, e.g. "schedule.t_list[0]".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, std::string detail)
        : std::runtime_error(path.empty() ? detail : path + ": " + detail), path_(std::move(path)),
          detail_(std::move(detail)) {}
    const std::string& path() const { return path_; }
    const std::string& detail() const { return detail_; }

private:
    std::string path_;
    std::string detail_;
};

struct CostSpec {
    std::string preset = "quadratic_cost";  ///< quadratic_cost | indicator_cost
    double a = 0.5;
    double lo = -1.0;
    double hi = 1.0;
    bool operator==(const CostSpec&) const = default;
};

struct LambdaSpec {
    std::string mode = "auto";  ///< auto | uniform | values
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;
    std::vector<double> values;
    double lip_c = -1.0;  ///< auto mode; < 0 means "estimate from the initial state"
    int points = 41;
    bool operator==(const LambdaSpec&) const = default;
};

struct PsiSpec {
    std::string preset = "sin";  ///< sin | linear | neg_identity | cubic
    double c = 1.0;
    double growth = 1.0;
    bool operator==(const PsiSpec&) const = default;
};

struct FamilySpec {
    std::string name;
    // heat, and the heat base of a perturbation
    std::vector<double> drift;
    std::vector<double> sigma;
    // gexp
    CostSpec cost;
    LambdaSpec lambdas;
    // g_expectation
    std::vector<HeatDriftParams> pairs;
    // gbm (one entry) and robust_gbm
    std::vector<GbmParams> gbm;
    int quad_nodes = 64;
    double p = 3.0;
    double horizon = 1.0;
    // perturbation
    std::string base = "heat";  ///< heat | identity
    PsiSpec psi;
    bool operator==(const FamilySpec&) const = default;
};

struct GridSpec {
    int dim = 1;
    double x_max = 8.0;
    int n_points = 801;
    bool operator==(const GridSpec&) const = default;
};

struct InitialSpec {
    std::string kind = "preset";  ///< preset | table | vector
    Preset preset = Preset::gaussian_bump;
    double scale = 1.0;
    std::string table;
    std::vector<double> vector;
    bool operator==(const InitialSpec&) const = default;
};

struct ScheduleSpec {
    std::vector<double> t_list;
    double tol = 1e-4;
    int n_min = 4;
    int n_max = 14;
    bool operator==(const ScheduleSpec&) const = default;
};

/// One task. Only the fields of its type are read or written.
struct TaskSpec {
    std::string type;  ///< evolve | defect | generator | certificate | audit | monotonicity | telescoping
    std::optional<double> max_error;
    double radius = 0.0;  ///< comparison box |x|_inf <= radius; 0 = whole trusted region
    // evolve
    std::string reference;  ///< "" or closed_form
    // defect / monotonicity
    double s = 0.25;
    double t = 0.25;
    // generator
    std::vector<double> h_levels;
    bool require_monotone = true;
    // certificate
    double horizon = 0.25;
    std::vector<int> levels;
    std::string expect;  ///< "" | bounded | diverging | inconclusive
    bool symmetric = false;
    // audit
    int samples = 100;
    double ball = 1.0;
    std::vector<double> times;
    double slack = 1e-8;
    // monotonicity
    double min_increment = -1e-10;
    // telescoping
    double t_max = 1.0;
    bool operator==(const TaskSpec&) const = default;
};

struct ExperimentSpec {
    std::string name = "experiment";
    FamilySpec family;
    GridSpec grid;
    NormSpec norm;
    InitialSpec initial;
    ScheduleSpec schedule;
    std::vector<TaskSpec> tasks;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    bool operator==(const ExperimentSpec&) const = default;

    bool is_ode() const { return family.name == "ode_neg_identity" || family.name == "ode_rotation"; }
};

const std::vector<std::string>& family_names();
const std::vector<std::string>& task_names();

/// Up to three known names closest to `name` by edit distance.
std::vector<std::string> suggest(const std::string& name, const std::vector<std::string>& known);

/// Validates and fills defaults. Relative table paths resolve against `base_dir`.
ExperimentSpec parse_config_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentSpec parse_config(const std::filesystem::path& path);

/// Canonical form with every default written out.
nlohmann::json serialize_config(const ExperimentSpec& spec);

/// A suite document is {"suite": [config | "relative/path.json", ...]}.
bool is_suite(const nlohmann::json& doc);
std::vector<ExperimentSpec> parse_suite(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Reads a JSON file; throws ConfigError on I/O or syntax errors.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace semiflow
