#include "semiflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "semiflow/chernoff.hpp"
#include "semiflow/families_nonlinear.hpp"

namespace semiflow {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
    return out;
}

std::string sub(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }
std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
}

void check_keys(const json& j, const std::string& path, const std::vector<std::string>& allowed) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
        const auto near = suggest(key, allowed);
        throw ConfigError(sub(path, key),
                          "unknown field" + (near.empty() ? std::string() : "; did you mean: " + join(near)));
    }
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    return v;
}

double number_or(const json& obj, const std::string& key, const std::string& path, double fallback) {
    return obj.contains(key) ? as_number(obj.at(key), sub(path, key)) : fallback;
}

long as_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer() && !(j.is_number_float() && j.get<double>() == std::floor(j.get<double>()))) {
        throw ConfigError(path, "expected an integer");
    }
    return j.is_number_integer() ? j.get<long>() : long(j.get<double>());
}

int int_or(const json& obj, const std::string& key, const std::string& path, int fallback) {
    return obj.contains(key) ? int(as_integer(obj.at(key), sub(path, key))) : fallback;
}

bool bool_or(const json& obj, const std::string& key, const std::string& path, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean()) throw ConfigError(sub(path, key), "expected true or false");
    return obj.at(key).get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

std::vector<double> number_list(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], idx(path, i)));
    return out;
}

std::vector<int> int_list(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(int(as_integer(j[i], idx(path, i))));
    return out;
}

std::string choice(const json& j, const std::string& path, const std::vector<std::string>& allowed,
                   const std::string& what) {
    const std::string s = as_string(j, path);
    if (std::find(allowed.begin(), allowed.end(), s) != allowed.end()) return s;
    const auto near = suggest(s, allowed);
    throw ConfigError(path, "unknown " + what + " '" + s + "'; did you mean: " + join(near.empty() ? allowed : near));
}

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"gaussian_bump", "cauchy_bump", "hat", "identity", "zero"};
    return names;
}

const std::vector<std::string> kCostPresets = {"quadratic_cost", "indicator_cost"};
const std::vector<std::string> kPsiPresets = {"sin", "linear", "neg_identity", "cubic"};

// sigma: number (times identity), flat diagonal list, or dim x dim matrix.
std::vector<double> parse_sigma(const json& j, int dim, const std::string& path) {
    std::vector<double> out(std::size_t(dim * dim), 0.0);
    if (j.is_number()) {
        const double s = as_number(j, path);
        for (int a = 0; a < dim; ++a) out[std::size_t(a * dim + a)] = s;
        return out;
    }
    if (!j.is_array() || j.size() != std::size_t(dim)) {
        throw ConfigError(path, "expected a number or " + std::to_string(dim) + " entries");
    }
    for (int a = 0; a < dim; ++a) {
        const json& row = j[std::size_t(a)];
        if (row.is_number()) {
            out[std::size_t(a * dim + a)] = as_number(row, idx(path, std::size_t(a)));
            continue;
        }
        const auto r = number_list(row, idx(path, std::size_t(a)));
        if (r.size() != std::size_t(dim)) throw ConfigError(idx(path, std::size_t(a)), "matrix row has the wrong length");
        for (int b = 0; b < dim; ++b) {
            if (a != b && r[std::size_t(b)] != 0.0) {
                throw ConfigError(idx(path, std::size_t(a)), "only diagonal sigma matrices are supported");
            }
            out[std::size_t(a * dim + b)] = r[std::size_t(b)];
        }
    }
    return out;
}

std::vector<double> parse_drift(const json& j, int dim, const std::string& path) {
    if (j.is_number()) return std::vector<double>(std::size_t(dim), as_number(j, path));
    auto v = number_list(j, path);
    if (v.size() != std::size_t(dim)) throw ConfigError(path, "expected " + std::to_string(dim) + " entries");
    return v;
}

json sigma_to_json(const std::vector<double>& sigma, int dim) {
    json m = json::array();
    for (int a = 0; a < dim; ++a) {
        json row = json::array();
        for (int b = 0; b < dim; ++b) row.push_back(sigma[std::size_t(a * dim + b)]);
        m.push_back(row);
    }
    return m;
}

HeatDriftParams parse_heat_params(const json& obj, int dim, const std::string& path) {
    HeatDriftParams p = HeatDriftParams::standard(dim);
    if (obj.contains("sigma")) p.sigma = parse_sigma(obj.at("sigma"), dim, sub(path, "sigma"));
    if (obj.contains("drift")) p.drift = parse_drift(obj.at("drift"), dim, sub(path, "drift"));
    return p;
}

void parse_family(const json& j, ExperimentSpec& spec) {
    const std::string path = "family";
    FamilySpec& fam = spec.family;
    json obj = j;
    if (j.is_string()) obj = json{{"name", j}};
    require_object(obj, path);
    if (!obj.contains("name")) throw ConfigError(sub(path, "name"), "missing family name");
    fam.name = choice(obj.at("name"), sub(path, "name"), family_names(), "family");
    const int dim = spec.grid.dim;

    if (fam.name == "heat") {
        check_keys(obj, path, {"name", "sigma", "drift"});
        const auto p = parse_heat_params(obj, dim, path);
        fam.sigma = p.sigma;
        fam.drift = p.drift;
    } else if (fam.name == "gexp") {
        check_keys(obj, path, {"name", "cost", "lambda_grid"});
        if (obj.contains("cost")) {
            const std::string cp = sub(path, "cost");
            json c = obj.at("cost");
            if (c.is_string()) c = json{{"preset", c}};
            require_object(c, cp);
            check_keys(c, cp, {"preset", "a", "lo", "hi"});
            if (c.contains("preset")) fam.cost.preset = choice(c.at("preset"), sub(cp, "preset"), kCostPresets, "cost preset");
            fam.cost.a = number_or(c, "a", cp, fam.cost.a);
            fam.cost.lo = number_or(c, "lo", cp, fam.cost.lo);
            fam.cost.hi = number_or(c, "hi", cp, fam.cost.hi);
            if (fam.cost.preset == "quadratic_cost" && !(fam.cost.a > 0.0)) throw ConfigError(sub(cp, "a"), "must be > 0");
            if (fam.cost.preset == "indicator_cost" && !(fam.cost.lo <= fam.cost.hi)) {
                throw ConfigError(sub(cp, "hi"), "must be >= lo");
            }
        }
        if (obj.contains("lambda_grid")) {
            const std::string lp = sub(path, "lambda_grid");
            const json& l = obj.at("lambda_grid");
            require_object(l, lp);
            check_keys(l, lp, {"mode", "lo", "hi", "step", "values", "lip_c", "points"});
            LambdaSpec& ls = fam.lambdas;
            if (l.contains("mode")) {
                ls.mode = choice(l.at("mode"), sub(lp, "mode"), {"auto", "uniform", "values"}, "lambda grid mode");
            } else {
                ls.mode = l.contains("values") ? "values" : (l.contains("step") ? "uniform" : "auto");
            }
            if (ls.mode == "uniform") {
                for (const char* k : {"lo", "hi", "step"}) {
                    if (!l.contains(k)) throw ConfigError(sub(lp, k), "required for a uniform lambda grid");
                }
                ls.lo = number_or(l, "lo", lp, 0.0);
                ls.hi = number_or(l, "hi", lp, 0.0);
                ls.step = number_or(l, "step", lp, 0.0);
                if (!(ls.step > 0.0)) throw ConfigError(sub(lp, "step"), "must be > 0");
                if (!(ls.lo <= ls.hi)) throw ConfigError(sub(lp, "hi"), "must be >= lo");
            } else if (ls.mode == "values") {
                if (!l.contains("values")) throw ConfigError(sub(lp, "values"), "required");
                if (dim != 1) throw ConfigError(sub(lp, "values"), "explicit value lists are 1D only");
                ls.values = number_list(l.at("values"), sub(lp, "values"));
                if (ls.values.empty()) throw ConfigError(sub(lp, "values"), "must not be empty");
            } else {
                ls.lip_c = number_or(l, "lip_c", lp, ls.lip_c);
                ls.points = int_or(l, "points", lp, ls.points);
                if (ls.points < 1 || ls.points % 2 == 0) throw ConfigError(sub(lp, "points"), "must be odd and >= 1");
            }
        }
        // The grid must contain the anchor and a finite-cost point.
        try {
            const CostFunction cost = fam.cost.preset == "quadratic_cost" ? CostFunction::quadratic(fam.cost.a, dim)
                                                                          : CostFunction::indicator(fam.cost.lo, fam.cost.hi, dim);
            if (fam.lambdas.mode == "uniform") {
                validate_lambda_grid(LambdaGrid::uniform(fam.lambdas.lo, fam.lambdas.hi, fam.lambdas.step, dim), cost);
            } else if (fam.lambdas.mode == "values") {
                validate_lambda_grid(LambdaGrid::from_values(fam.lambdas.values), cost);
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError(sub(path, "lambda_grid"), e.what());
        }
    } else if (fam.name == "g_expectation") {
        check_keys(obj, path, {"name", "pairs", "sigma_set", "drift_set"});
        if (obj.contains("pairs") && (obj.contains("sigma_set") || obj.contains("drift_set"))) {
            throw ConfigError(sub(path, "pairs"), "give either pairs or sigma_set/drift_set");
        }
        if (obj.contains("pairs")) {
            const json& ps = obj.at("pairs");
            if (!ps.is_array() || ps.empty()) throw ConfigError(sub(path, "pairs"), "expected a non-empty array");
            for (std::size_t i = 0; i < ps.size(); ++i) {
                const std::string pp = idx(sub(path, "pairs"), i);
                require_object(ps[i], pp);
                check_keys(ps[i], pp, {"sigma", "drift"});
                fam.pairs.push_back(parse_heat_params(ps[i], dim, pp));
            }
        } else {
            const std::vector<double> sigmas =
                obj.contains("sigma_set") ? number_list(obj.at("sigma_set"), sub(path, "sigma_set")) : std::vector<double>{0.5, 1.0};
            const std::vector<double> drifts =
                obj.contains("drift_set") ? number_list(obj.at("drift_set"), sub(path, "drift_set")) : std::vector<double>{0.0};
            if (sigmas.empty()) throw ConfigError(sub(path, "sigma_set"), "must not be empty");
            if (drifts.empty()) throw ConfigError(sub(path, "drift_set"), "must not be empty");
            for (double s : sigmas) {
                for (double d : drifts) {
                    HeatDriftParams p;
                    p.sigma = parse_sigma(json(s), dim, "");
                    p.drift.assign(std::size_t(dim), d);
                    fam.pairs.push_back(p);
                }
            }
        }
    } else if (fam.name == "gbm" || fam.name == "robust_gbm") {
        check_keys(obj, path, {"name", "mu", "sigma", "pairs", "quad_nodes", "p", "horizon"});
        if (dim != 1) throw ConfigError("grid.dim", "GBM families are one-dimensional");
        fam.quad_nodes = int_or(obj, "quad_nodes", path, fam.quad_nodes);
        fam.p = number_or(obj, "p", path, fam.p);
        fam.horizon = number_or(obj, "horizon", path, fam.horizon);
        if (fam.quad_nodes < 8 || fam.quad_nodes > 256) throw ConfigError(sub(path, "quad_nodes"), "must lie in [8, 256]");
        if (!(fam.p > 1.0)) throw ConfigError(sub(path, "p"), "must be > 1");
        if (!(fam.horizon > 0.0)) throw ConfigError(sub(path, "horizon"), "must be > 0");
        auto make = [&](double mu, double sigma) { return GbmParams{mu, sigma, fam.quad_nodes, fam.p}; };
        if (fam.name == "gbm") {
            if (obj.contains("pairs")) throw ConfigError(sub(path, "pairs"), "use mu and sigma for the gbm family");
            fam.gbm = {make(number_or(obj, "mu", path, 0.1), number_or(obj, "sigma", path, 0.3))};
        } else {
            if (obj.contains("mu") || obj.contains("sigma")) throw ConfigError(sub(path, "pairs"), "robust_gbm takes a pairs list");
            if (obj.contains("pairs")) {
                const json& ps = obj.at("pairs");
                if (!ps.is_array() || ps.empty()) throw ConfigError(sub(path, "pairs"), "expected a non-empty array");
                for (std::size_t i = 0; i < ps.size(); ++i) {
                    const std::string pp = idx(sub(path, "pairs"), i);
                    require_object(ps[i], pp);
                    check_keys(ps[i], pp, {"mu", "sigma"});
                    if (!ps[i].contains("mu") || !ps[i].contains("sigma")) throw ConfigError(pp, "needs mu and sigma");
                    fam.gbm.push_back(make(number_or(ps[i], "mu", pp, 0.0), number_or(ps[i], "sigma", pp, 0.0)));
                }
            } else {
                fam.gbm = {make(0.1, 0.2), make(-0.1, 0.2)};
            }
        }
    } else if (fam.name == "ode_neg_identity" || fam.name == "ode_rotation") {
        check_keys(obj, path, {"name"});
    } else if (fam.name == "perturbation") {
        check_keys(obj, path, {"name", "base", "sigma", "drift", "psi"});
        if (obj.contains("base")) fam.base = choice(obj.at("base"), sub(path, "base"), {"heat", "identity"}, "base family");
        if (fam.base == "heat") {
            const auto p = parse_heat_params(obj, dim, path);
            fam.sigma = p.sigma;
            fam.drift = p.drift;
        } else if (obj.contains("sigma") || obj.contains("drift")) {
            throw ConfigError(sub(path, "base"), "the identity base takes no sigma or drift");
        }
        if (obj.contains("psi")) {
            const std::string pp = sub(path, "psi");
            json ps = obj.at("psi");
            if (ps.is_string()) ps = json{{"preset", ps}};
            require_object(ps, pp);
            check_keys(ps, pp, {"preset", "c", "growth"});
            if (ps.contains("preset")) fam.psi.preset = choice(ps.at("preset"), sub(pp, "preset"), kPsiPresets, "reaction preset");
            fam.psi.c = number_or(ps, "c", pp, fam.psi.c);
            fam.psi.growth = number_or(ps, "growth", pp, fam.psi.growth);
        }
        const PerturbationSpec pert = fam.psi.preset == "sin"      ? PerturbationSpec::sine()
                                      : fam.psi.preset == "linear" ? PerturbationSpec::linear(fam.psi.c)
                                      : fam.psi.preset == "cubic"  ? PerturbationSpec::cubic(fam.psi.growth)
                                                                   : PerturbationSpec::neg_identity();
        try {
            validate_perturbation(pert);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(sub(path, "psi"), e.what());
        }
    }
}

void parse_initial(const json* j, ExperimentSpec& spec, const std::filesystem::path& base_dir) {
    const std::string path = "initial";
    InitialSpec& init = spec.initial;
    if (spec.is_ode()) {
        init.kind = "vector";
        if (!j) {
            init.vector = spec.family.name == "ode_rotation" ? std::vector<double>{1.0, 0.0} : std::vector<double>{1.0};
        } else if (j->is_number()) {
            init.vector = {as_number(*j, path)};
        } else if (j->is_array()) {
            init.vector = number_list(*j, path);
        } else if (j->is_object()) {
            check_keys(*j, path, {"vector"});
            if (!j->contains("vector")) throw ConfigError(sub(path, "vector"), "required");
            init.vector = number_list(j->at("vector"), sub(path, "vector"));
        } else {
            throw ConfigError(path, "ODE families take a number or a vector");
        }
        if (init.vector.empty()) throw ConfigError(path, "state must not be empty");
        if (spec.family.name == "ode_rotation" && init.vector.size() != 2) throw ConfigError(path, "rotation needs a 2-vector");
        return;
    }
    init.kind = "preset";
    const std::string& fam = spec.family.name;
    init.preset = (fam == "gbm" || fam == "robust_gbm") ? Preset::identity : Preset::gaussian_bump;
    init.scale = fam == "g_expectation" ? -1.0 : 1.0;
    if (!j) return;
    json obj = *j;
    if (obj.is_string()) obj = json{{"preset", obj}};
    if (!obj.is_object()) throw ConfigError(path, "grid families take a preset name or an object");
    check_keys(obj, path, {"preset", "scale", "table"});
    if (obj.contains("preset") && obj.contains("table")) throw ConfigError(sub(path, "table"), "give either preset or table");
    init.scale = number_or(obj, "scale", path, obj.contains("preset") || obj.contains("table") ? 1.0 : init.scale);
    if (obj.contains("preset")) {
        init.preset = preset_from_string(choice(obj.at("preset"), sub(path, "preset"), preset_names(), "preset"));
    } else if (obj.contains("table")) {
        init.kind = "table";
        std::filesystem::path p = as_string(obj.at("table"), sub(path, "table"));
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        init.table = p.lexically_normal().string();
        if (!std::filesystem::exists(init.table)) throw ConfigError(sub(path, "table"), "file not found: " + init.table);
    }
}

void check_dyadic(double t, int n_min, const std::string& path) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError(path, "time must be finite and >= 0");
    try {
        dyadic_partition(t, n_min);
    } catch (const NonDyadicTime& e) {
        throw ConfigError(path, e.what());
    }
}

TaskSpec parse_task(const json& j, const std::string& path, const ExperimentSpec& spec) {
    TaskSpec task;
    json obj = j;
    if (j.is_string()) obj = json{{"type", j}};
    require_object(obj, path);
    if (!obj.contains("type")) throw ConfigError(sub(path, "type"), "missing task type");
    task.type = choice(obj.at("type"), sub(path, "type"), task_names(), "task");
    const auto& fam = spec.family.name;
    const int n_min = spec.schedule.n_min;
    auto max_error = [&] {
        if (obj.contains("max_error")) {
            const double m = as_number(obj.at("max_error"), sub(path, "max_error"));
            if (!(m >= 0.0)) throw ConfigError(sub(path, "max_error"), "must be >= 0");
            task.max_error = m;
        }
    };
    auto radius = [&] {
        task.radius = number_or(obj, "radius", path, 0.0);
        if (!(task.radius >= 0.0)) throw ConfigError(sub(path, "radius"), "must be >= 0");
    };
    auto levels = [&](std::vector<int> fallback) {
        task.levels = obj.contains("levels") ? int_list(obj.at("levels"), sub(path, "levels")) : fallback;
        for (std::size_t i = 0; i < task.levels.size(); ++i) {
            if (task.levels[i] < 0 || task.levels[i] > 30) throw ConfigError(idx(sub(path, "levels"), i), "must lie in [0, 30]");
            if (i > 0 && task.levels[i] <= task.levels[i - 1]) throw ConfigError(idx(sub(path, "levels"), i), "levels must ascend");
        }
    };

    if (task.type == "evolve") {
        check_keys(obj, path, {"type", "reference", "max_error", "radius"});
        if (obj.contains("reference")) task.reference = choice(obj.at("reference"), sub(path, "reference"), {"closed_form"}, "reference");
        max_error();
        radius();
        if (task.max_error && task.reference.empty()) throw ConfigError(sub(path, "reference"), "max_error needs a reference");
        if (spec.schedule.t_list.empty()) throw ConfigError("schedule.t_list", "evolve needs at least one time");
    } else if (task.type == "defect") {
        check_keys(obj, path, {"type", "s", "t", "max_error"});
        task.s = number_or(obj, "s", path, task.s);
        task.t = number_or(obj, "t", path, task.t);
        check_dyadic(task.s, n_min, sub(path, "s"));
        check_dyadic(task.t, n_min, sub(path, "t"));
        max_error();
        if (!task.max_error) task.max_error = 3.0 * spec.schedule.tol;
    } else if (task.type == "generator") {
        check_keys(obj, path, {"type", "h_levels", "max_error", "radius", "require_monotone"});
        task.h_levels = obj.contains("h_levels") ? number_list(obj.at("h_levels"), sub(path, "h_levels"))
                                                 : std::vector<double>{0x1p-4, 0x1p-5, 0x1p-6, 0x1p-7, 0x1p-8};
        if (task.h_levels.empty()) throw ConfigError(sub(path, "h_levels"), "must not be empty");
        for (std::size_t i = 0; i < task.h_levels.size(); ++i) {
            const double h = task.h_levels[i];
            if (!(h > 0.0) || dyadic_level(h) < 0 || dyadic_level(h) > spec.schedule.n_max) {
                throw ConfigError(idx(sub(path, "h_levels"), i), "must be a positive dyadic step within n_max");
            }
            if (i > 0 && !(h < task.h_levels[i - 1])) throw ConfigError(idx(sub(path, "h_levels"), i), "h_levels must decrease");
        }
        max_error();
        radius();
        task.require_monotone = bool_or(obj, "require_monotone", path, true);
    } else if (task.type == "certificate") {
        check_keys(obj, path, {"type", "horizon", "levels", "expect", "symmetric"});
        task.horizon = number_or(obj, "horizon", path, task.horizon);
        levels({3, 4, 5, 6, 7, 8});
        if (task.levels.empty()) throw ConfigError(sub(path, "levels"), "must not be empty");
        if (!(task.horizon > 0.0)) throw ConfigError(sub(path, "horizon"), "must be > 0");
        check_dyadic(task.horizon, task.levels.front(), sub(path, "horizon"));
        if (obj.contains("expect")) {
            task.expect = choice(obj.at("expect"), sub(path, "expect"), {"bounded", "diverging", "inconclusive"}, "verdict");
        }
        task.symmetric = bool_or(obj, "symmetric", path, false);
        if (task.symmetric && spec.is_ode()) throw ConfigError(sub(path, "symmetric"), "ODE families have no order conjugate");
    } else if (task.type == "audit") {
        check_keys(obj, path, {"type", "samples", "ball", "times", "slack"});
        task.samples = int_or(obj, "samples", path, task.samples);
        task.ball = number_or(obj, "ball", path, task.ball);
        task.times = obj.contains("times") ? number_list(obj.at("times"), sub(path, "times"))
                                           : std::vector<double>{0x1p-6, 0x1p-4, 0x1p-2};
        task.slack = number_or(obj, "slack", path, task.slack);
        if (task.samples < 1) throw ConfigError(sub(path, "samples"), "must be >= 1");
        if (!(task.ball > 0.0)) throw ConfigError(sub(path, "ball"), "must be > 0");
        if (!(task.slack >= 0.0)) throw ConfigError(sub(path, "slack"), "must be >= 0");
        for (std::size_t i = 0; i < task.times.size(); ++i) {
            if (!(task.times[i] >= 0.0)) throw ConfigError(idx(sub(path, "times"), i), "must be >= 0");
        }
        if (!spec.seed) throw ConfigError("seed", "required by the audit task");
    } else if (task.type == "monotonicity") {
        check_keys(obj, path, {"type", "t", "levels", "min_increment"});
        if (fam != "heat" && fam != "gexp" && fam != "g_expectation" && fam != "gbm" && fam != "robust_gbm") {
            throw ConfigError(sub(path, "type"), "monotonicity needs a supremum-type family");
        }
        task.t = number_or(obj, "t", path, task.t);
        levels({2, 3, 4, 5, 6});
        if (task.levels.size() < 2) throw ConfigError(sub(path, "levels"), "needs at least two levels");
        check_dyadic(task.t, task.levels.front(), sub(path, "t"));
        task.min_increment = number_or(obj, "min_increment", path, task.min_increment);
    } else if (task.type == "telescoping") {
        check_keys(obj, path, {"type", "t_max", "levels", "max_error"});
        if (fam != "perturbation") throw ConfigError(sub(path, "type"), "telescoping needs the perturbation family");
        task.t_max = number_or(obj, "t_max", path, task.t_max);
        if (!(task.t_max > 0.0)) throw ConfigError(sub(path, "t_max"), "must be > 0");
        levels({1, 2, 3, 4});
        if (task.levels.empty()) throw ConfigError(sub(path, "levels"), "must not be empty");
        max_error();
        if (!task.max_error) task.max_error = 1e-10;
    }
    return task;
}

int edit_distance(const std::string& a, const std::string& b) {
    std::vector<int> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = int(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        int diag = row[0];
        row[0] = int(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const int up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

}  // namespace

const std::vector<std::string>& family_names() {
    static const std::vector<std::string> names = {"heat", "gexp", "g_expectation", "gbm", "robust_gbm",
                                                   "ode_neg_identity", "ode_rotation", "perturbation"};
    return names;
}

const std::vector<std::string>& task_names() {
    static const std::vector<std::string> names = {"evolve", "defect", "generator", "certificate",
                                                   "audit", "monotonicity", "telescoping"};
    return names;
}

std::vector<std::string> suggest(const std::string& name, const std::vector<std::string>& known) {
    std::vector<std::pair<int, std::string>> scored;
    for (const auto& k : known) scored.emplace_back(edit_distance(name, k), k);
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::string> out;
    for (const auto& [d, k] : scored) {
        if (out.size() == 3 || d > std::max<int>(3, int(name.size()) / 2)) break;
        out.push_back(k);
    }
    return out;
}

ExperimentSpec parse_config_json(const json& doc, const std::filesystem::path& base_dir) {
    require_object(doc, "");
    check_keys(doc, "", {"name", "family", "grid", "norm", "initial", "schedule", "t_list", "tol", "n_min", "n_max",
                         "tasks", "output_dir", "seed"});
    ExperimentSpec spec;
    if (doc.contains("name")) spec.name = as_string(doc.at("name"), "name");
    if (spec.name.empty()) throw ConfigError("name", "must not be empty");
    if (!doc.contains("family")) throw ConfigError("family", "required");

    // Family name first: it decides whether a grid is needed.
    {
        const json& f = doc.at("family");
        const json* name = f.is_string() ? &f : (f.is_object() && f.contains("name") ? &f.at("name") : nullptr);
        if (name) spec.family.name = choice(*name, f.is_string() ? "family" : "family.name", family_names(), "family");
    }
    if (spec.is_ode()) {
        if (doc.contains("grid")) throw ConfigError("grid", "ODE families do not use a grid");
        if (doc.contains("norm")) throw ConfigError("norm", "ODE families use the Euclidean distance");
    } else if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        require_object(g, "grid");
        check_keys(g, "grid", {"dim", "x_max", "n_points", "h"});
        spec.grid.dim = int_or(g, "dim", "grid", 1);
        spec.grid.x_max = number_or(g, "x_max", "grid", spec.grid.x_max);
        if (spec.grid.dim != 1 && spec.grid.dim != 2) throw ConfigError("grid.dim", "must be 1 or 2");
        if (!(spec.grid.x_max > 0.0)) throw ConfigError("grid.x_max", "must be > 0");
        if (g.contains("n_points") && g.contains("h")) throw ConfigError("grid.h", "give either n_points or h");
        if (g.contains("h")) {
            const double h = as_number(g.at("h"), "grid.h");
            if (!(h > 0.0)) throw ConfigError("grid.h", "must be > 0");
            const double cells = spec.grid.x_max / h;
            if (std::abs(cells - std::round(cells)) > 1e-9 * cells) throw ConfigError("grid.h", "must divide x_max");
            spec.grid.n_points = 2 * int(std::round(cells)) + 1;
        } else {
            spec.grid.n_points = int_or(g, "n_points", "grid", spec.grid.n_points);
        }
        if (spec.grid.n_points < 3 || spec.grid.n_points % 2 == 0) throw ConfigError("grid.n_points", "must be odd and >= 3");
    }

    // Schedule: block or top-level shorthand.
    {
        const bool shorthand = doc.contains("t_list") || doc.contains("tol") || doc.contains("n_min") || doc.contains("n_max");
        if (shorthand && doc.contains("schedule")) throw ConfigError("schedule", "give the schedule block or top-level fields, not both");
        json s = doc.contains("schedule") ? doc.at("schedule") : json::object();
        if (shorthand) {
            for (const char* k : {"t_list", "tol", "n_min", "n_max"}) {
                if (doc.contains(k)) s[k] = doc.at(k);
            }
        }
        require_object(s, "schedule");
        check_keys(s, "schedule", {"t_list", "tol", "n_min", "n_max"});
        ScheduleSpec& sc = spec.schedule;
        sc.tol = number_or(s, "tol", "schedule", sc.tol);
        sc.n_min = int_or(s, "n_min", "schedule", sc.n_min);
        sc.n_max = int_or(s, "n_max", "schedule", sc.n_max);
        if (!(sc.tol > 0.0)) throw ConfigError("schedule.tol", "must be > 0");
        if (sc.n_min < 0) throw ConfigError("schedule.n_min", "must be >= 0");
        if (sc.n_max < sc.n_min || sc.n_max > 30) throw ConfigError("schedule.n_max", "must lie in [n_min, 30]");
        if (s.contains("t_list")) sc.t_list = number_list(s.at("t_list"), "schedule.t_list");
        for (std::size_t i = 0; i < sc.t_list.size(); ++i) {
            check_dyadic(sc.t_list[i], sc.n_min, idx("schedule.t_list", i));
            if (i > 0 && !(sc.t_list[i] > sc.t_list[i - 1])) throw ConfigError(idx("schedule.t_list", i), "times must increase strictly");
        }
    }

    parse_family(doc.at("family"), spec);

    if (!spec.is_ode()) {
        const bool gbm = spec.family.name == "gbm" || spec.family.name == "robust_gbm";
        spec.norm = gbm ? NormSpec::weighted(spec.family.p) : NormSpec{};
        if (doc.contains("norm")) {
            const json& n = doc.at("norm");
            require_object(n, "norm");
            check_keys(n, "norm", {"kind", "p"});
            const std::string kind = n.contains("kind") ? choice(n.at("kind"), "norm.kind", {"sup", "weighted"}, "norm") : "sup";
            if (kind == "sup") {
                if (n.contains("p")) throw ConfigError("norm.p", "only the weighted norm takes p");
                spec.norm = NormSpec{};
            } else {
                const double p = number_or(n, "p", "norm", gbm ? spec.family.p : 2.0);
                if (!(p > 1.0)) throw ConfigError("norm.p", "must be > 1");
                spec.norm = NormSpec::weighted(p);
            }
        }
        if (gbm && !(spec.norm.kind == NormSpec::Kind::weighted && spec.norm.p == spec.family.p)) {
            throw ConfigError("norm", "GBM families use the weighted norm with the family's p");
        }
        const auto& f = spec.family.name;
        if (spec.norm.kind == NormSpec::Kind::weighted && (f == "heat" || f == "g_expectation") && spec.norm.p != 2.0) {
            throw ConfigError("norm.p", "weighted heat-type families use p = 2");
        }
        if (spec.norm.kind == NormSpec::Kind::weighted && (f == "gexp" || f == "perturbation")) {
            throw ConfigError("norm.kind", "family '" + f + "' is defined with the sup norm");
        }
    }

    parse_initial(doc.contains("initial") ? &doc.at("initial") : nullptr, spec, base_dir);

    if (doc.contains("seed")) {
        const json& s = doc.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
            throw ConfigError("seed", "expected a nonnegative integer");
        }
        spec.seed = s.get<std::uint64_t>();
    }
    if (doc.contains("output_dir")) spec.output_dir = as_string(doc.at("output_dir"), "output_dir");

    if (!doc.contains("tasks")) throw ConfigError("tasks", "required");
    const json& tasks = doc.at("tasks");
    if (!tasks.is_array() || tasks.empty()) throw ConfigError("tasks", "expected a non-empty array");
    for (std::size_t i = 0; i < tasks.size(); ++i) spec.tasks.push_back(parse_task(tasks[i], idx("tasks", i), spec));
    return spec;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ConfigError("", path.string() + ": " + e.what());
    }
}

ExperimentSpec parse_config(const std::filesystem::path& path) {
    json doc = read_json_file(path);
    if (doc.is_object() && !doc.contains("name")) doc["name"] = path.stem().string();
    return parse_config_json(doc, path.parent_path());
}

bool is_suite(const json& doc) { return doc.is_object() && doc.contains("suite"); }

std::vector<ExperimentSpec> parse_suite(const json& doc, const std::filesystem::path& base_dir) {
    check_keys(doc, "", {"suite"});
    const json& items = doc.at("suite");
    if (!items.is_array() || items.empty()) throw ConfigError("suite", "expected a non-empty array");
    std::vector<ExperimentSpec> out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const std::string path = idx("suite", i);
        try {
            if (items[i].is_string()) {
                std::filesystem::path p = items[i].get<std::string>();
                if (p.is_relative()) p = base_dir / p;
                out.push_back(parse_config(p));
            } else {
                json item = items[i];
                if (item.is_object() && !item.contains("name")) item["name"] = "suite_" + std::to_string(i);
                out.push_back(parse_config_json(item, base_dir));
            }
        } catch (const ConfigError& e) {
            throw ConfigError(e.path().empty() ? path : path + "." + e.path(), e.detail());
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            if (out[i].name == out[k].name) throw ConfigError(idx("suite", i), "duplicate experiment name '" + out[i].name + "'");
        }
    }
    return out;
}

json serialize_config(const ExperimentSpec& spec) {
    json doc;
    doc["name"] = spec.name;
    const FamilySpec& f = spec.family;
    const int dim = spec.grid.dim;
    json fam{{"name", f.name}};
    if (f.name == "heat" || (f.name == "perturbation" && f.base == "heat")) {
        fam["sigma"] = sigma_to_json(f.sigma, dim);
        fam["drift"] = f.drift;
    }
    if (f.name == "gexp") {
        fam["cost"] = f.cost.preset == "quadratic_cost" ? json{{"preset", f.cost.preset}, {"a", f.cost.a}}
                                                        : json{{"preset", f.cost.preset}, {"lo", f.cost.lo}, {"hi", f.cost.hi}};
        const LambdaSpec& l = f.lambdas;
        if (l.mode == "uniform") {
            fam["lambda_grid"] = {{"mode", l.mode}, {"lo", l.lo}, {"hi", l.hi}, {"step", l.step}};
        } else if (l.mode == "values") {
            fam["lambda_grid"] = {{"mode", l.mode}, {"values", l.values}};
        } else {
            fam["lambda_grid"] = {{"mode", l.mode}, {"lip_c", l.lip_c}, {"points", l.points}};
        }
    }
    if (f.name == "g_expectation") {
        json pairs = json::array();
        for (const auto& p : f.pairs) pairs.push_back({{"sigma", sigma_to_json(p.sigma, dim)}, {"drift", p.drift}});
        fam["pairs"] = pairs;
    }
    if (f.name == "gbm") {
        fam["mu"] = f.gbm.at(0).mu;
        fam["sigma"] = f.gbm.at(0).sigma;
    }
    if (f.name == "robust_gbm") {
        json pairs = json::array();
        for (const auto& g : f.gbm) pairs.push_back({{"mu", g.mu}, {"sigma", g.sigma}});
        fam["pairs"] = pairs;
    }
    if (f.name == "gbm" || f.name == "robust_gbm") {
        fam["quad_nodes"] = f.quad_nodes;
        fam["p"] = f.p;
        fam["horizon"] = f.horizon;
    }
    if (f.name == "perturbation") {
        fam["base"] = f.base;
        fam["psi"] = {{"preset", f.psi.preset}, {"c", f.psi.c}, {"growth", f.psi.growth}};
    }
    doc["family"] = fam;

    if (!spec.is_ode()) {
        doc["grid"] = {{"dim", spec.grid.dim}, {"x_max", spec.grid.x_max}, {"n_points", spec.grid.n_points}};
        doc["norm"] = spec.norm.kind == NormSpec::Kind::sup ? json{{"kind", "sup"}}
                                                            : json{{"kind", "weighted"}, {"p", spec.norm.p}};
    }
    const InitialSpec& in = spec.initial;
    if (in.kind == "vector") {
        doc["initial"] = {{"vector", in.vector}};
    } else if (in.kind == "table") {
        doc["initial"] = {{"table", in.table}, {"scale", in.scale}};
    } else {
        doc["initial"] = {{"preset", std::string(to_string(in.preset))}, {"scale", in.scale}};
    }
    doc["schedule"] = {{"t_list", spec.schedule.t_list},
                       {"tol", spec.schedule.tol},
                       {"n_min", spec.schedule.n_min},
                       {"n_max", spec.schedule.n_max}};

    json tasks = json::array();
    for (const TaskSpec& t : spec.tasks) {
        json j{{"type", t.type}};
        if (t.type == "evolve") {
            if (!t.reference.empty()) j["reference"] = t.reference;
            if (t.max_error) j["max_error"] = *t.max_error;
            j["radius"] = t.radius;
        } else if (t.type == "defect") {
            j["s"] = t.s;
            j["t"] = t.t;
            j["max_error"] = *t.max_error;
        } else if (t.type == "generator") {
            j["h_levels"] = t.h_levels;
            if (t.max_error) j["max_error"] = *t.max_error;
            j["radius"] = t.radius;
            j["require_monotone"] = t.require_monotone;
        } else if (t.type == "certificate") {
            j["horizon"] = t.horizon;
            j["levels"] = t.levels;
            if (!t.expect.empty()) j["expect"] = t.expect;
            j["symmetric"] = t.symmetric;
        } else if (t.type == "audit") {
            j["samples"] = t.samples;
            j["ball"] = t.ball;
            j["times"] = t.times;
            j["slack"] = t.slack;
        } else if (t.type == "monotonicity") {
            j["t"] = t.t;
            j["levels"] = t.levels;
            j["min_increment"] = t.min_increment;
        } else if (t.type == "telescoping") {
            j["t_max"] = t.t_max;
            j["levels"] = t.levels;
            j["max_error"] = *t.max_error;
        }
        tasks.push_back(j);
    }
    doc["tasks"] = tasks;
    if (!spec.output_dir.empty()) doc["output_dir"] = spec.output_dir;
    if (spec.seed) doc["seed"] = *spec.seed;
    return doc;
}

}  // namespace semiflow
