#include "semiflow/reports.hpp"

#include <cmath>

namespace semiflow {

using nlohmann::json;

json json_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

namespace {

json number_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(json_number(x));
    return a;
}

}  // namespace

json to_json(const ConvergenceReport& r) {
    return {{"t", r.t},           {"n_min", r.n_min},         {"n_last", r.n_last},
            {"tol", r.tol},       {"deltas", number_array(r.deltas)}, {"converged", r.converged},
            {"steps_total", r.steps_total}};
}

ConvergenceReport convergence_report_from_json(const json& j) {
    ConvergenceReport r;
    r.t = j.at("t").get<double>();
    r.n_min = j.at("n_min").get<int>();
    r.n_last = j.at("n_last").get<int>();
    r.tol = j.at("tol").get<double>();
    for (const auto& d : j.at("deltas")) r.deltas.push_back(d.is_null() ? NAN : d.get<double>());
    r.converged = j.at("converged").get<bool>();
    r.steps_total = j.at("steps_total").get<std::int64_t>();
    return r;
}

json to_json(const DefectResult& r) { return {{"defect", json_number(r.defect)}, {"converged", r.converged}}; }

json to_json(const GeneratorTable& t) {
    json entries = json::array();
    for (const auto& e : t.entries) {
        entries.push_back({{"h", e.h}, {"error", json_number(e.error)}, {"converged", e.converged}, {"n_last", e.n_last}});
    }
    return {{"entries", entries}, {"monotone_decrease", t.monotone_decrease}, {"smallest_error", json_number(t.smallest_error)}};
}

json to_json(const GenConditionReport& r) {
    return {{"t0", r.t0},
            {"value", json_number(r.value)},
            {"value_half_t0", json_number(r.value_half)},
            {"lambdas", r.lambdas},
            {"levels", r.levels}};
}

json to_json(const LipschitzCertificate& c) {
    return {{"state", c.state_id},
            {"horizon", c.horizon},
            {"levels", c.levels},
            {"ratios", number_array(c.ratios)},
            {"growth", number_array(c.growth)},
            {"gamma_hat", json_number(c.gamma_hat)},
            {"verdict", std::string(to_string(c.verdict))}};
}

json to_json(const SymmetricCertificate& c) {
    return {{"plus", to_json(c.plus)}, {"minus", to_json(c.minus)}, {"joint", std::string(to_string(c.joint))}};
}

json to_json(const InvarianceReport& r) {
    return {{"t", r.t}, {"evolution", to_json(r.evolution)}, {"certificate", to_json(r.certificate)}};
}

json to_json(const AuditReport& r) {
    json entries = json::array();
    for (const auto& e : r.entries) {
        json j{{"check", e.check},
               {"radius", json_number(e.radius)},
               {"t", e.t},
               {"measured", json_number(e.measured)},
               {"declared", json_number(e.declared)},
               {"margin", json_number(e.margin)},
               {"seed", e.seed},
               {"violated", e.violated}};
        if (e.check == "alpha_composition" || e.check == "beta_composition") j["s"] = e.s;
        entries.push_back(std::move(j));
    }
    return {{"family", r.family},
            {"seed", r.seed},
            {"slack", r.slack},
            {"radius", r.radius},
            {"samples", r.samples},
            {"t_list", r.t_list},
            {"violations", r.violations},
            {"min_margin", json_number(r.min_margin)},
            {"entries", entries}};
}

}  // namespace semiflow
