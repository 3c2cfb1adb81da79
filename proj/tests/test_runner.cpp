#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "semiflow/config.hpp"
#include "semiflow/runner.hpp"

using namespace semiflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("semiflow_runner_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& doc) {
    const fs::path p = dir / name;
    std::ofstream(p) << doc.dump(2);
    return p;
}

int cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" + std::string(SEMIFLOW_CLI) + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json heat_doc(double max_error) {
    json doc = json::parse(R"({"name": "heat", "family": "heat", "grid": {"x_max": 8, "h": 0.05},
        "t_list": [0.25, 0.5], "tasks": [{"type": "evolve", "reference": "closed_form", "radius": 4}]})");
    doc["tasks"][0]["max_error"] = max_error;
    return doc;
}

}  // namespace

TEST_CASE("output directory precedence") {
    ExperimentSpec spec;
    ::unsetenv(kOutputDirEnv);
    CHECK(resolve_output_dir(spec, std::nullopt) == fs::path("semiflow_out"));
    ::setenv(kOutputDirEnv, "/tmp/from_env", 1);
    CHECK(resolve_output_dir(spec, std::nullopt) == fs::path("/tmp/from_env"));
    spec.output_dir = "from_spec";
    CHECK(resolve_output_dir(spec, std::nullopt) == fs::path("from_spec"));
    CHECK(resolve_output_dir(spec, fs::path("from_cli")) == fs::path("from_cli"));
    ::unsetenv(kOutputDirEnv);
}

TEST_CASE("sha256 and file names") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(state_file_name(0.5) == "state_t0.5.csv");
    CHECK(to_csv(VectorState{{1.0, -2.5}}) == "v1,v2\n1,-2.5\n");
}

TEST_CASE("closed forms") {
    auto spec = parse_config_json(heat_doc(1e-3));
    const auto u = closed_form_grid(spec, 0.5);
    REQUIRE(u);
    CHECK(u->at(u->grid().size() / 2) == doctest::Approx(1.0 / std::sqrt(2.0)));
    spec.initial.preset = Preset::hat;
    CHECK_FALSE(closed_form_grid(spec, 0.5));
    const auto ode = parse_config_json(json::parse(R"({"family": "ode_rotation", "t_list": [1], "tasks": ["evolve"]})"));
    const auto v = closed_form_vector(ode, 1.0);
    REQUIRE(v);
    CHECK(v->coordinates[0] == doctest::Approx(std::cos(1.0)));
}

TEST_CASE("run writes artifacts and a manifest") {
    const fs::path dir = scratch("artifacts");
    const auto spec = parse_config_json(heat_doc(1e-3));
    const auto result = run_experiment(spec, dir);
    CHECK(result.passed);
    CHECK(fs::exists(dir / "state_t0.25.csv"));
    CHECK(fs::exists(dir / "state_t0.5.csv"));
    CHECK(fs::exists(dir / "evolve.json"));
    const json manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["passed"] == true);
    CHECK(parse_config_json(manifest["config"]) == spec);
    for (const auto& o : manifest["outputs"]) {
        const std::string content = slurp(dir / o["file"].get<std::string>());
        CHECK(o["sha256"] == sha256_hex(content));
        CHECK(o["bytes"] == content.size());
    }
    const auto csv = read_csv(dir / "state_t0.5.csv");
    CHECK(csv.header.front() == "x");
}

TEST_CASE("runs are byte-identical") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    json doc = heat_doc(1e-3);
    doc["seed"] = 17;
    doc["tasks"].push_back({{"type", "audit"}, {"samples", 10}});
    const auto spec = parse_config_json(doc);
    run_experiment(spec, a);
    run_experiment(spec, b);
    for (const auto& e : fs::directory_iterator(a)) {
        CAPTURE(e.path().filename().string());
        CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    }
}

TEST_CASE("failed tasks are recorded") {
    const fs::path dir = scratch("failing");
    const auto result = run_experiment(parse_config_json(heat_doc(1e-12)), dir);
    CHECK_FALSE(result.passed);
    REQUIRE(result.tasks.size() == 1);
    CHECK(result.tasks[0].status == "fail");
    CHECK(json::parse(slurp(dir / "manifest.json"))["passed"] == false);
}

TEST_CASE("cli exit codes") {
    const fs::path dir = scratch("cli");
    const auto good = write_config(dir, "good.json", heat_doc(1e-3));
    const auto bad = write_config(dir, "bad.json", heat_doc(1e-12));
    json broken = heat_doc(1e-3);
    broken["family"] = "heet";
    const auto err = write_config(dir, "broken.json", broken);

    CHECK(cli("run \"" + good.string() + "\" --out \"" + (dir / "o1").string() + "\"") == 0);
    CHECK(fs::exists(dir / "o1" / "manifest.json"));
    CHECK(cli("verify \"" + good.string() + "\" --out \"" + (dir / "o2").string() + "\"") == 0);
    CHECK(cli("verify \"" + bad.string() + "\" --out \"" + (dir / "o3").string() + "\"") == 1);
    CHECK(cli("run \"" + err.string() + "\" --out \"" + (dir / "o4").string() + "\"") == 2);
    CHECK_FALSE(fs::exists(dir / "o4"));
    CHECK(cli("run \"" + (dir / "missing.json").string() + "\"") == 2);
    CHECK(cli("frobnicate") == 2);
}

TEST_CASE("cli honours the output directory variable") {
    const fs::path dir = scratch("env");
    const auto good = write_config(dir, "good.json", heat_doc(1e-3));
    const fs::path target = dir / "from_env";
    CHECK(cli("run \"" + good.string() + "\"", std::string(kOutputDirEnv) + "=\"" + target.string() + "\"") == 0);
    CHECK(fs::exists(target / "manifest.json"));
}

TEST_CASE("cli plot") {
    const fs::path dir = scratch("plot");
    const auto good = write_config(dir, "good.json", heat_doc(1e-3));
    REQUIRE(cli("run \"" + good.string() + "\" --out \"" + dir.string() + "\"") == 0);
    CHECK(cli("plot \"" + (dir / "state_t0.5.csv").string() + "\" \"" + (dir / "u.svg").string() + "\"") == 0);
    CHECK(slurp(dir / "u.svg").find("<svg") != std::string::npos);
    CHECK(cli("plot \"" + (dir / "nope.csv").string() + "\" \"" + (dir / "v.svg").string() + "\"") != 0);
}

TEST_CASE("verify suite over the shipped configs") {
    const fs::path dir = scratch("suite");
    CHECK(cli("verify \"" + (fs::path(SEMIFLOW_CONFIG_DIR) / "verify_suite.json").string() + "\" --out \"" + dir.string() + "\"") == 0);
    CHECK(fs::exists(dir / "gexp_quadratic" / "manifest.json"));
}
