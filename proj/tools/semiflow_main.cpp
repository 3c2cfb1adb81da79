// semiflow command line: run / verify experiment configs, plot CSV states.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "semiflow/config.hpp"
#include "semiflow/plot.hpp"
#include "semiflow/runner.hpp"

namespace fs = std::filesystem;
using namespace semiflow;

namespace {

constexpr int kPass = 0, kFail = 1, kConfigError = 2;

std::vector<ExperimentSpec> load(const fs::path& path) {
    const auto doc = read_json_file(path);
    if (is_suite(doc)) return parse_suite(doc, path.parent_path());
    return {parse_config(path)};
}

int run_specs(const fs::path& config, const std::optional<fs::path>& out, bool verbose) {
    std::vector<ExperimentSpec> specs;
    try {
        specs = load(config);
    } catch (const ConfigError& e) {
        std::cerr << "semiflow: config error: " << e.what() << '\n';
        return kConfigError;
    }
    const bool suite = specs.size() > 1 || is_suite(read_json_file(config));
    bool all_passed = true;
    for (const auto& spec : specs) {
        fs::path dir = resolve_output_dir(spec, out);
        if (suite) dir /= spec.name;
        RunResult result;
        try {
            result = run_experiment(spec, dir);
        } catch (const ConfigError& e) {
            std::cerr << "semiflow: config error in " << spec.name << ": " << e.what() << '\n';
            return kConfigError;
        } catch (const std::exception& e) {
            std::cerr << "semiflow: " << spec.name << ": " << e.what() << '\n';
            return kFail;
        }
        all_passed = all_passed && result.passed;
        if (verbose) {
            for (const auto& t : result.tasks) {
                std::cout << (t.status == "pass" ? "PASS " : "FAIL ") << spec.name << " " << t.type;
                if (!t.message.empty()) std::cout << ": " << t.message;
                std::cout << '\n';
            }
        }
        std::cout << spec.name << ": " << (result.passed ? "passed" : "FAILED") << " -> "
                  << (dir / "manifest.json").string() << '\n';
    }
    return all_passed ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chernoff approximation of nonlinear semigroups"};
    app.require_subcommand(1);

    fs::path run_config, verify_config, csv_path, svg_path;
    std::string run_out, verify_out, title;

    auto* run = app.add_subcommand("run", "run an experiment config (or suite) and write its artifacts");
    run->add_option("config", run_config, "config JSON")->required();
    run->add_option("--out", run_out, std::string("output directory (default: $") + kOutputDirEnv + " or semiflow_out)");

    auto* verify = app.add_subcommand("verify", "run a config or suite and report pass/fail per task");
    verify->add_option("config", verify_config, "config JSON")->required();
    verify->add_option("--out", verify_out, "output directory");

    auto* plot = app.add_subcommand("plot", "render a state CSV as an SVG line plot");
    plot->add_option("csv", csv_path, "input CSV")->required();
    plot->add_option("svg", svg_path, "output SVG")->required();
    plot->add_option("--title", title, "plot title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kConfigError;
    }

    auto optional_dir = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<fs::path>(s); };
    if (*run) return run_specs(run_config, optional_dir(run_out), false);
    if (*verify) return run_specs(verify_config, optional_dir(verify_out), true);
    try {
        emit_plot(csv_path, svg_path, {title});
    } catch (const std::exception& e) {
        std::cerr << "semiflow: plot: " << e.what() << '\n';
        return kConfigError;
    }
    return kPass;
}
