#include "semiflow/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>

#include "semiflow/diagnostics.hpp"
#include "semiflow/reports.hpp"

namespace semiflow {

using nlohmann::json;

std::filesystem::path default_output_dir() {
    const char* env = std::getenv(kOutputDirEnv);
    if (env && *env) return env;
    return "semiflow_out";
}

std::filesystem::path resolve_output_dir(const ExperimentSpec& spec, const std::optional<std::filesystem::path>& cli_out) {
    if (cli_out) return *cli_out;
    if (!spec.output_dir.empty()) return spec.output_dir;
    return default_output_dir();
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string state_file_name(double t) { return "state_t" + format_double(t) + ".csv"; }

std::string to_csv(const VectorState& x) {
    std::string out;
    for (std::size_t i = 0; i < x.coordinates.size(); ++i) out += (i ? ",v" : "v") + std::to_string(i + 1);
    out += '\n';
    for (std::size_t i = 0; i < x.coordinates.size(); ++i) out += (i ? "," : "") + format_double(x.coordinates[i]);
    out += '\n';
    return out;
}

namespace {

bool is_gbm(const ExperimentSpec& spec) { return spec.family.name == "gbm" || spec.family.name == "robust_gbm"; }

Grid spec_grid(const ExperimentSpec& spec) {
    try {
        return Grid::create(spec.grid.dim, spec.grid.x_max, spec.grid.n_points);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("grid", e.what());
    }
}

CostFunction build_cost(const ExperimentSpec& spec) {
    const CostSpec& c = spec.family.cost;
    return c.preset == "quadratic_cost" ? CostFunction::quadratic(c.a, spec.grid.dim)
                                        : CostFunction::indicator(c.lo, c.hi, spec.grid.dim);
}

LambdaGrid build_lambdas(const ExperimentSpec& spec, const GridFunction& initial) {
    const LambdaSpec& l = spec.family.lambdas;
    const CostFunction cost = build_cost(spec);
    try {
        if (l.mode == "uniform") return LambdaGrid::uniform(l.lo, l.hi, l.step, spec.grid.dim);
        if (l.mode == "values") return LambdaGrid::from_values(l.values);
        const double c = l.lip_c >= 0.0 ? l.lip_c : lipschitz_constant_estimate(initial);
        return auto_lambda_grid(c, cost, l.points);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("family.lambda_grid", e.what());
    }
}

PerturbationSpec build_psi(const PsiSpec& p) {
    if (p.preset == "sin") return PerturbationSpec::sine();
    if (p.preset == "linear") return PerturbationSpec::linear(p.c);
    if (p.preset == "cubic") return PerturbationSpec::cubic(p.growth);
    return PerturbationSpec::neg_identity();
}

double psi_rate(const PsiSpec& p) {
    if (p.preset == "linear") return p.c;
    if (p.preset == "neg_identity") return -1.0;
    return std::numeric_limits<double>::quiet_NaN();
}

// (1 + 2 s^2 t)^{-1/2} exp(-(x + l t)^2 / (1 + 2 s^2 t)) per axis.
double heat_gaussian(const std::array<double, 2>& x, int dim, const std::vector<double>& sigma,
                     const std::vector<double>& drift, double t) {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) {
        const double s = sigma[std::size_t(a * dim + a)];
        const double spread = 1.0 + 2.0 * s * s * t;
        const double y = x[a] + drift[std::size_t(a)] * t;
        v *= std::exp(-y * y / spread) / std::sqrt(spread);
    }
    return v;
}

}  // namespace

GridFunction build_initial_grid(const ExperimentSpec& spec) {
    const Grid grid = spec_grid(spec);
    const InitialSpec& in = spec.initial;
    if (in.kind == "table") {
        GridFunction f = [&] {
            try {
                return grid_function_from_csv(read_csv(in.table), is_gbm(spec) ? Extension::clamp : Extension::zero);
            } catch (const std::exception& e) {
                throw ConfigError("initial.table", e.what());
            }
        }();
        if (!(f.grid() == grid)) throw ConfigError("initial.table", "table nodes do not match the grid block");
        return in.scale == 1.0 ? f : in.scale * f;
    }
    if (in.kind != "preset") throw ConfigError("initial", "grid families need a preset or a table");
    const GridFunction f = sample_function(in.preset, grid);
    if (is_gbm(spec) && f.codim() != 1) throw ConfigError("initial.preset", "GBM families need scalar states");
    return in.scale == 1.0 ? f : in.scale * f;
}

VectorState build_initial_vector(const ExperimentSpec& spec) { return VectorState{spec.initial.vector}; }

GeneratingFamily<GridFunction> build_grid_family(const ExperimentSpec& spec, const GridFunction& initial) {
    const FamilySpec& f = spec.family;
    try {
        if (f.name == "heat") return make_heat_family({f.drift, f.sigma}, spec.norm);
        if (f.name == "gexp") return make_gexp_family(build_lambdas(spec, initial), build_cost(spec));
        if (f.name == "g_expectation") return make_g_expectation_family(f.pairs, spec.norm);
        if (f.name == "gbm") return make_gbm_linear_family(f.gbm.at(0), initial.grid(), f.horizon);
        if (f.name == "robust_gbm") return make_robust_gbm_family(f.gbm, initial.grid(), f.horizon);
        if (f.name == "perturbation") {
            const auto base = f.base == "heat" ? make_heat_family({f.drift, f.sigma}, spec.norm) : make_identity_family(spec.norm);
            return make_perturbation_family(base, build_psi(f.psi));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("family", e.what());
    }
    throw ConfigError("family.name", "'" + f.name + "' is not a grid family");
}

GeneratingFamily<VectorState> build_vector_family(const ExperimentSpec& spec) {
    const int dim = int(spec.initial.vector.size());
    if (spec.family.name == "ode_neg_identity") return make_ode_family(VectorField::neg_identity(dim));
    if (spec.family.name == "ode_rotation") return make_ode_family(VectorField::rotation());
    throw ConfigError("family.name", "'" + spec.family.name + "' is not an ODE family");
}

std::optional<GridFunction> closed_form_grid(const ExperimentSpec& spec, double t) {
    const FamilySpec& f = spec.family;
    const InitialSpec& in = spec.initial;
    const Grid grid = spec_grid(spec);
    const int dim = grid.dim();
    const bool bump = in.kind == "preset" && in.preset == Preset::gaussian_bump;
    const bool identity = in.kind == "preset" && in.preset == Preset::identity;

    auto gaussian = [&](const std::vector<double>& sigma, const std::vector<double>& drift, double factor, double shift) {
        GridFunction out(grid, 1, Extension::zero);
        for (std::size_t node = 0; node < grid.size(); ++node) {
            out.at(node) = factor * in.scale * heat_gaussian(grid.point(node), dim, sigma, drift, t) + shift;
        }
        return out;
    };

    if (f.name == "heat" && bump) return gaussian(f.sigma, f.drift, 1.0, 0.0);
    if (f.name == "g_expectation" && bump && f.pairs.size() == 1) return gaussian(f.pairs[0].sigma, f.pairs[0].drift, 1.0, 0.0);
    if (f.name == "gexp" && bump) {
        // Linear only for a single finite-cost drift.
        const LambdaGrid lg = build_lambdas(spec, sample_function(in.preset, grid));
        const CostFunction cost = build_cost(spec);
        std::vector<std::vector<double>> finite;
        for (const auto& p : lg.points) {
            if (std::isfinite(cost.value(p))) finite.push_back(p);
        }
        if (finite.size() != 1) return std::nullopt;
        const auto id = HeatDriftParams::standard(dim);
        return gaussian(id.sigma, finite[0], 1.0, -cost.value(finite[0]) * t);
    }
    if (f.name == "perturbation" && std::isfinite(psi_rate(f.psi))) {
        const double growth = std::exp(psi_rate(f.psi) * t);
        if (f.base == "heat" && bump) return gaussian(f.sigma, f.drift, growth, 0.0);
        if (f.base == "identity") return growth * build_initial_grid(spec);
    }
    if (is_gbm(spec) && identity) {
        double mu_up = -std::numeric_limits<double>::infinity(), mu_down = std::numeric_limits<double>::infinity();
        for (const auto& g : f.gbm) {
            mu_up = std::max(mu_up, g.mu);
            mu_down = std::min(mu_down, g.mu);
        }
        // Sign-preserving: the max picks the largest growth for x >= 0 and the smallest for x < 0
        // (after scaling by a possibly negative factor).
        GridFunction out(grid, 1, Extension::clamp);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double v = in.scale * grid.coordinate(0, int(i));
            out.at(i) = v * std::exp((v >= 0.0 ? mu_up : mu_down) * t);
        }
        return out;
    }
    return std::nullopt;
}

std::optional<VectorState> closed_form_vector(const ExperimentSpec& spec, double t) {
    const auto& x = spec.initial.vector;
    if (spec.family.name == "ode_neg_identity") return std::exp(-t) * VectorState{x};
    if (spec.family.name == "ode_rotation") {
        const double c = std::cos(t), s = std::sin(t);
        return VectorState{{c * x[0] - s * x[1], s * x[0] + c * x[1]}};
    }
    return std::nullopt;
}

namespace {

struct Artifacts {
    std::vector<std::pair<std::string, std::string>> files;  // name, content

    void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }
    std::string unique_name(const std::string& stem) const {
        auto taken = [&](const std::string& n) {
            return std::any_of(files.begin(), files.end(), [&](const auto& f) { return f.first == n; });
        };
        std::string name = stem + ".json";
        for (int k = 2; taken(name); ++k) name = stem + "_" + std::to_string(k) + ".json";
        return name;
    }
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string csv_of(const GridFunction& f) { return to_csv(f); }
std::string csv_of(const VectorState& x) { return to_csv(x); }

struct Context {
    const ExperimentSpec& spec;
    ChernoffOptions opts;
};

template <class State>
struct Hooks {
    std::function<std::optional<State>(double)> closed_form;
    /// Comparison metric on |x|_inf <= radius (0: the family's output metric).
    std::function<double(const State&, const State&, double)> compare;
    /// Default comparison radius for generator tasks (0: output metric).
    double generator_radius = 0.0;
    std::function<State(const State&)> partner;  // second state for telescoping
    std::function<double(double)> collar;        // interior collar radius for a largest step
};

template <class State>
json run_task(const Context& ctx, const TaskSpec& task, const GeneratingFamily<State>& family, const State& x,
              const Hooks<State>& hooks, Artifacts& artifacts, bool& passed, std::string& message) {
    const ExperimentSpec& spec = ctx.spec;
    json rep{{"type", task.type}, {"family", family.name}};
    passed = true;

    if (task.type == "evolve") {
        const auto& times = spec.schedule.t_list;
        const auto path = evolve_path(family, times, x, ctx.opts);
        json reports = json::array(), errors = json::array();
        for (std::size_t i = 0; i < times.size(); ++i) {
            const std::string file = state_file_name(times[i]);
            artifacts.add(file, csv_of(path.states[i]));
            reports.push_back(to_json(path.reports[i]));
            if (!path.reports[i].converged) {
                passed = false;
                message = "Chernoff iteration did not converge at t=" + format_double(times[i]);
            }
            if (!task.reference.empty()) {
                const auto ref = hooks.closed_form(times[i]);
                const double err = hooks.compare(path.states[i], *ref, task.radius);
                errors.push_back(json_number(err));
                if (task.max_error && !(err <= *task.max_error)) {
                    passed = false;
                    message = "error " + format_double(err) + " exceeds " + format_double(*task.max_error) + " at t=" +
                              format_double(times[i]);
                }
            }
        }
        rep["times"] = times;
        rep["reports"] = reports;
        if (!task.reference.empty()) {
            rep["reference"] = task.reference;
            rep["errors"] = errors;
            rep["radius"] = task.radius;
        }
        if (task.max_error) rep["max_error"] = *task.max_error;
    } else if (task.type == "defect") {
        const auto d = semigroup_defect(family, task.s, task.t, x, ctx.opts);
        rep["s"] = task.s;
        rep["t"] = task.t;
        rep["result"] = to_json(d);
        rep["max_error"] = *task.max_error;
        passed = d.converged && d.defect <= *task.max_error;
        if (!passed) message = d.converged ? "defect " + format_double(d.defect) + " exceeds " + format_double(*task.max_error)
                                           : "a Chernoff limit did not converge";
    } else if (task.type == "generator") {
        const double radius = task.radius > 0.0 ? task.radius : hooks.generator_radius;
        typename GeneratingFamily<State>::Metric metric;
        if (radius > 0.0) metric = [&hooks, radius](const State& a, const State& b) { return hooks.compare(a, b, radius); };
        const auto table = generator_estimate(family, x, task.h_levels, ctx.opts, metric);
        rep["table"] = to_json(table);
        rep["radius"] = json_number(radius);
        const double last = table.entries.back().error;
        if (task.max_error) {
            rep["max_error"] = *task.max_error;
            if (!(last <= *task.max_error)) {
                passed = false;
                message = "error " + format_double(last) + " at h=" + format_double(table.entries.back().h) + " exceeds " +
                          format_double(*task.max_error);
            }
        }
        rep["require_monotone"] = task.require_monotone;
        if (task.require_monotone && !table.monotone_decrease) {
            passed = false;
            message = "quotient errors do not decrease along h";
        }
    } else if (task.type == "certificate") {
        Verdict verdict;
        if (task.symmetric) {
            const auto c = symmetric_lipschitz_certificate(family, x, task.horizon, task.levels, "initial");
            rep["certificate"] = to_json(c);
            verdict = c.joint;
        } else {
            const auto c = lipschitz_certificate(family, x, task.horizon, task.levels, "initial");
            rep["certificate"] = to_json(c);
            verdict = c.verdict;
        }
        if (!task.expect.empty()) {
            rep["expect"] = task.expect;
            passed = to_string(verdict) == task.expect;
            if (!passed) message = "verdict " + std::string(to_string(verdict)) + ", expected " + task.expect;
        }
    } else if (task.type == "audit") {
        const auto audit = alpha_beta_audit(family, x, std::size_t(task.samples), task.ball, task.times, *spec.seed, task.slack);
        rep["audit"] = to_json(audit);
        passed = audit.violations == 0;
        if (!passed) message = std::to_string(audit.violations) + " alpha/beta violations";
    } else if (task.type == "monotonicity" || task.type == "telescoping") {
        if constexpr (std::is_same_v<State, GridFunction>) {
            if (task.type == "monotonicity") {
                const double h_max = std::ldexp(task.t, -task.levels.front());
                const double radius = hooks.collar ? hooks.collar(h_max) : std::numeric_limits<double>::infinity();
                const double m = partition_monotonicity_check(family, x, task.t, task.levels, radius);
                rep["radius"] = json_number(radius);
                rep["t"] = task.t;
                rep["levels"] = task.levels;
                rep["min_increment"] = json_number(m);
                rep["threshold"] = task.min_increment;
                passed = m >= task.min_increment;
                if (!passed) message = "increment " + format_double(m) + " below " + format_double(task.min_increment);
            } else {
                const FamilySpec& f = spec.family;
                const auto base =
                    f.base == "heat" ? make_heat_family({f.drift, f.sigma}, spec.norm) : make_identity_family(spec.norm);
                const auto pert = build_psi(f.psi);
                const GridFunction g = hooks.partner(x);
                double worst = 0.0;
                json rows = json::array();
                for (int n : task.levels) {
                    const auto k_max = int(std::floor(std::ldexp(task.t_max, n)));
                    double level_worst = 0.0;
                    for (int k = 1; k <= k_max; ++k) level_worst = std::max(level_worst, telescoping_residual(base, pert, x, g, k, n));
                    rows.push_back({{"level", n}, {"k_max", k_max}, {"residual", json_number(level_worst)}});
                    worst = std::max(worst, level_worst);
                }
                rep["levels"] = rows;
                rep["residual"] = json_number(worst);
                rep["max_error"] = *task.max_error;
                passed = worst <= *task.max_error;
                if (!passed) message = "residual " + format_double(worst) + " exceeds " + format_double(*task.max_error);
            }
        } else {
            throw std::invalid_argument(task.type + " needs a grid family");
        }
    }
    rep["passed"] = passed;
    if (!message.empty()) rep["message"] = message;
    return rep;
}

template <class State>
void run_all(const ExperimentSpec& spec, const GeneratingFamily<State>& family, const State& x, const Hooks<State>& hooks,
             RunResult& result, Artifacts& artifacts) {
    // References are checked before any work so that a missing closed form is a config error.
    for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
        const TaskSpec& t = spec.tasks[i];
        if (t.type == "evolve" && !t.reference.empty() && !hooks.closed_form(0.0)) {
            throw ConfigError("tasks[" + std::to_string(i) + "].reference",
                              "no closed form is known for this family and initial state");
        }
    }
    const Context ctx{spec, ChernoffOptions{spec.schedule.tol, spec.schedule.n_min, spec.schedule.n_max}};
    for (const TaskSpec& task : spec.tasks) {
        const std::string file = artifacts.unique_name(task.type);
        TaskOutcome outcome{task.type, file, "pass", ""};
        json rep;
        try {
            bool passed = true;
            rep = run_task(ctx, task, family, x, hooks, artifacts, passed, outcome.message);
            if (!passed) outcome.status = "fail";
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            outcome.status = "error";
            outcome.message = e.what();
            rep = json{{"type", task.type}, {"family", family.name}, {"passed", false}, {"error", e.what()}};
        }
        artifacts.add(file, dump(rep));
        result.tasks.push_back(outcome);
    }
}

}  // namespace

RunResult run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir) {
    RunResult result;
    result.name = spec.name;
    result.out_dir = out_dir;
    Artifacts artifacts;

    if (spec.is_ode()) {
        const VectorState x = build_initial_vector(spec);
        const auto family = build_vector_family(spec);
        Hooks<VectorState> hooks;
        hooks.closed_form = [&spec](double t) { return closed_form_vector(spec, t); };
        hooks.compare = [](const VectorState& a, const VectorState& b, double) { return distance(a, b); };
        run_all(spec, family, x, hooks, result, artifacts);
    } else {
        const GridFunction x = build_initial_grid(spec);
        const auto family = build_grid_family(spec, x);
        Hooks<GridFunction> hooks;
        hooks.closed_form = [&spec](double t) { return closed_form_grid(spec, t); };
        const double trusted = family.trusted_radius;
        hooks.compare = [&family, &spec, trusted](const GridFunction& a, const GridFunction& b, double radius) {
            if (radius <= 0.0) return family.output_distance(a, b);
            return distance(a, b, spec.norm, std::min(radius, trusted));
        };
        if (!is_gbm(spec)) {
            double sigma_max = 1.0;
            for (double s : spec.family.sigma) sigma_max = std::max(sigma_max, std::abs(s));
            for (const auto& p : spec.family.pairs) {
                for (double s : p.sigma) sigma_max = std::max(sigma_max, std::abs(s));
            }
            const Grid grid = x.grid();
            hooks.collar = [grid, sigma_max](double h_max) {
                return std::max(0.0, interior_collar_radius(grid, h_max, sigma_max));
            };
            double h_max = 0.0;
            for (const auto& t : spec.tasks) {
                if (t.type == "generator") h_max = std::max(h_max, t.h_levels.front());
            }
            hooks.generator_radius = hooks.collar(h_max);
        }
        // Compactly supported partner so the box truncation does not enter the identity.
        hooks.partner = [](const GridFunction& f) {
            return sample_function(Preset::hat, f.grid(), f.extension()) - 0.5 * f;
        };
        run_all(spec, family, x, hooks, result, artifacts);
    }

    // Single writer: outputs first, manifest last.
    std::filesystem::create_directories(out_dir);
    json outputs = json::array();
    for (const auto& [name, content] : artifacts.files) {
        std::ofstream out(out_dir / name, std::ios::binary);
        out << content;
        if (!out) throw std::runtime_error("cannot write " + (out_dir / name).string());
        ArtifactEntry entry{name, sha256_hex(content), content.size()};
        outputs.push_back({{"file", entry.file}, {"sha256", entry.sha256}, {"bytes", entry.bytes}});
        result.artifacts.push_back(entry);
    }
    result.passed = std::all_of(result.tasks.begin(), result.tasks.end(), [](const auto& t) { return t.status == "pass"; });
    json tasks = json::array();
    for (const auto& t : result.tasks) {
        json j{{"type", t.type}, {"file", t.file}, {"status", t.status}};
        if (!t.message.empty()) j["message"] = t.message;
        tasks.push_back(j);
    }
    const json manifest{{"experiment", spec.name},
                        {"config", serialize_config(spec)},
                        {"outputs", outputs},
                        {"tasks", tasks},
                        {"passed", result.passed}};
    std::ofstream out(out_dir / "manifest.json", std::ios::binary);
    out << dump(manifest);
    if (!out) throw std::runtime_error("cannot write " + (out_dir / "manifest.json").string());
    return result;
}

}  // namespace semiflow
