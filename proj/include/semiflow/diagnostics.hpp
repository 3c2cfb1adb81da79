/**
 * @file diagnostics.hpp
 * @brief Numerical certificates for generating families: generator
 *        consistency, the difference-quotient condition, Lipschitz-set
 *        certificates, alpha/beta audits and partition monotonicity.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semiflow/chernoff.hpp"
#include "semiflow/state_space.hpp"

namespace semiflow {

// ---------------------------------------------------------------------------
// Generator consistency

struct GeneratorEntry {
    double h = 0.0;
    double error = 0.0;
    bool converged = false;  ///< false: S(h)f did not meet its tolerance
    int n_last = 0;
};

struct GeneratorTable {
    std::vector<GeneratorEntry> entries;
    bool monotone_decrease = false;
    double smallest_error = std::numeric_limits<double>::infinity();
};

/// True when errors never increase, except for at most one step that grows by
/// no more than `blip` (relative).
bool decreasing_with_one_blip(const std::vector<double>& errors, double blip = 0.2);

/// Radius of the interior collar: X_max - 2h - 8 sigma sqrt(h_max).
double interior_collar_radius(const Grid& grid, double h_max, double sigma_max = 1.0);

/// Quotient error ||(S(h)f - f)/h - target|| for each h. The Chernoff limit is
/// run with tolerance opts.tol * h so the quotient is resolved to opts.tol, and
/// n_min is raised to the dyadic level of h when needed.
template <class State>
GeneratorTable generator_estimate(const GeneratingFamily<State>& family, const State& f, const State& target,
                                  const std::vector<double>& h_levels, const ChernoffOptions& opts,
                                  const typename GeneratingFamily<State>::Metric& metric = {}) {
    if (h_levels.empty()) throw std::invalid_argument("generator_estimate needs at least one h");
    for (std::size_t i = 0; i < h_levels.size(); ++i) {
        if (!(h_levels[i] > 0.0) || dyadic_level(h_levels[i]) < 0) {
            throw std::invalid_argument("generator step sizes must be positive dyadic numbers");
        }
        if (i > 0 && !(h_levels[i] < h_levels[i - 1])) throw std::invalid_argument("h_levels must decrease");
    }
    auto dist = [&](const State& a, const State& b) { return metric ? metric(a, b) : family.output_distance(a, b); };
    GeneratorTable table;
    std::vector<double> errors;
    for (double h : h_levels) {
        ChernoffOptions o = opts;
        o.tol = opts.tol * h;
        o.n_min = std::max(opts.n_min, dyadic_level(h));
        o.n_max = std::max(o.n_max, o.n_min);
        const auto r = chernoff_limit(family, h, f, o);
        const State quotient = (1.0 / h) * (r.state - f);
        GeneratorEntry e{h, dist(quotient, target), r.report.converged, r.report.n_last};
        errors.push_back(e.error);
        table.smallest_error = std::min(table.smallest_error, e.error);
        table.entries.push_back(e);
    }
    table.monotone_decrease = decreasing_with_one_blip(errors);
    return table;
}

/// Same with the family's analytic generator as target.
template <class State>
GeneratorTable generator_estimate(const GeneratingFamily<State>& family, const State& f,
                                  const std::vector<double>& h_levels, const ChernoffOptions& opts,
                                  const typename GeneratingFamily<State>::Metric& metric = {}) {
    if (!family.analytic_generator) {
        throw std::invalid_argument("family '" + family.name + "' has no analytic generator");
    }
    return generator_estimate(family, f, family.analytic_generator(f), h_levels, opts, metric);
}

// ---------------------------------------------------------------------------
// Difference-quotient condition

/// max over levels n, 1 <= k <= t0 2^n and lambda of
/// || (I(2^-n)^k (x + lambda y) - I(2^-n)^k x) / lambda - y ||.
template <class State>
double gen_condition_probe(const GeneratingFamily<State>& family, const State& x, const State& y, double t0,
                           const std::vector<double>& lambdas, const std::vector<int>& levels) {
    if (!(t0 > 0.0) || dyadic_level(t0) < 0) throw std::invalid_argument("t0 must be a positive dyadic time");
    for (double l : lambdas) {
        if (!(l > 0.0 && l <= 1.0)) throw std::invalid_argument("probe lambdas must lie in (0, 1]");
    }
    double value = 0.0;
    for (int n : levels) {
        if (n < 0) throw std::invalid_argument("probe levels must be >= 0");
        const auto k_max = std::int64_t(std::floor(std::ldexp(t0, n)));
        if (k_max < 1) continue;
        const double dt = std::ldexp(1.0, -n);
        for (double lambda : lambdas) {
            State u = x;
            State v = x + lambda * y;
            for (std::int64_t k = 1; k <= k_max; ++k) {
                u = family.step(dt, u);
                v = family.step(dt, v);
                const State q = (1.0 / lambda) * (v - u);
                value = std::max(value, family.output_distance(q, y));
            }
        }
    }
    return value;
}

struct GenConditionReport {
    double t0 = 0.0;
    double value = 0.0;        ///< probe at t0
    double value_half = 0.0;   ///< probe at t0 / 2
    std::vector<double> lambdas;
    std::vector<int> levels;
};

template <class State>
GenConditionReport gen_condition_report(const GeneratingFamily<State>& family, const State& x, const State& y,
                                        double t0, const std::vector<double>& lambdas,
                                        const std::vector<int>& levels) {
    GenConditionReport r{t0, 0.0, 0.0, lambdas, levels};
    r.value = gen_condition_probe(family, x, y, t0, lambdas, levels);
    r.value_half = gen_condition_probe(family, x, y, 0.5 * t0, lambdas, levels);
    return r;
}

// ---------------------------------------------------------------------------
// Lipschitz-set certificates

enum class Verdict { bounded, diverging, inconclusive };

std::string_view to_string(Verdict v);

struct LipschitzCertificate {
    std::string state_id;
    double horizon = 0.0;
    std::vector<int> levels;
    /// ratios[i] = max over dyadic t <= T at levels[0..i] of d(I(t)x, x)/t.
    std::vector<double> ratios;
    /// growth[i] = ratios[i+1] / ratios[i] (1 when both are 0).
    std::vector<double> growth;
    double gamma_hat = 0.0;
    Verdict verdict = Verdict::inconclusive;
};

/// Bounded when the last three ratios are within 10% (max <= 1.1 min);
/// diverging when the last three growth factors are >= 1.2; else inconclusive.
Verdict classify_ratios(const std::vector<double>& ratios, std::vector<double>* growth = nullptr);

template <class State>
LipschitzCertificate lipschitz_certificate(const GeneratingFamily<State>& family, const State& x, double horizon,
                                           const std::vector<int>& levels, std::string state_id = {}) {
    if (!(horizon > 0.0)) throw std::invalid_argument("certificate horizon must be positive");
    if (levels.empty()) throw std::invalid_argument("certificate needs at least one level");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (i > 0 && !(levels[i] > levels[i - 1])) throw std::invalid_argument("certificate levels must ascend");
    }
    dyadic_partition(horizon, levels.front());

    LipschitzCertificate cert;
    cert.state_id = std::move(state_id);
    cert.horizon = horizon;
    cert.levels = levels;
    std::map<double, double> seen;  // t -> d(I(t)x, x)/t
    double running = 0.0;
    for (int n : levels) {
        const DyadicPartition part = dyadic_partition(horizon, n);
        for (std::int64_t k = 1; k <= part.steps; ++k) {
            const double t = std::ldexp(double(k), -n);
            if (seen.count(t)) continue;
            const State moved = family.step(t, x);
            if (!all_finite(moved)) throw NonFiniteState(k);
            const double r = family.output_distance(moved, x) / t;
            seen.emplace(t, r);
            running = std::max(running, r);
        }
        cert.ratios.push_back(running);
    }
    cert.gamma_hat = running;
    cert.verdict = classify_ratios(cert.ratios, &cert.growth);
    return cert;
}

struct SymmetricCertificate {
    LipschitzCertificate plus;
    LipschitzCertificate minus;
    Verdict joint = Verdict::inconclusive;
};

/// bounded iff both bounded; diverging if either diverges; else inconclusive.
Verdict joint_verdict(Verdict a, Verdict b);

template <class State>
SymmetricCertificate symmetric_lipschitz_certificate(const GeneratingFamily<State>& family, const State& f,
                                                     double horizon, const std::vector<int>& levels,
                                                     const std::string& state_id = {}) {
    const auto minus = minus_conjugate(family);
    SymmetricCertificate s;
    s.plus = lipschitz_certificate(family, f, horizon, levels, state_id);
    s.minus = lipschitz_certificate(minus, f, horizon, levels, state_id);
    s.joint = joint_verdict(s.plus.verdict, s.minus.verdict);
    return s;
}

struct InvarianceReport {
    double t = 0.0;
    ConvergenceReport evolution;
    SymmetricCertificate certificate;
};

/// Symmetric certificate of S(t)f, with S(t)f from chernoff_limit.
template <class State>
InvarianceReport invariance_probe(const GeneratingFamily<State>& family, const State& f, double t, double horizon,
                                  const std::vector<int>& levels, const ChernoffOptions& opts,
                                  const std::string& state_id = {}) {
    auto evolved = chernoff_limit(family, t, f, opts);
    InvarianceReport r;
    r.t = t;
    r.evolution = evolved.report;
    r.certificate = symmetric_lipschitz_certificate(family, evolved.state, horizon, levels,
                                                    state_id.empty() ? std::string("S(t)f") : state_id);
    return r;
}

// ---------------------------------------------------------------------------
// alpha / beta audit

struct AuditEntry {
    std::string check;  ///< alpha, beta, identity, alpha_composition, beta_composition
    double radius = 0.0;
    double s = 0.0;  ///< first time of a composition triple
    double t = 0.0;
    double measured = 0.0;
    double declared = 0.0;
    double margin = 0.0;  ///< declared + slack - measured
    std::uint64_t seed = 0;
    bool violated = false;
};

struct AuditReport {
    std::string family;
    std::uint64_t seed = 0;
    double slack = 1e-8;
    double radius = 0.0;
    std::size_t samples = 0;
    std::vector<double> t_list;
    std::vector<AuditEntry> entries;
    std::size_t violations = 0;
    double min_margin = std::numeric_limits<double>::infinity();
};

/// Seed of sample i under the audit seed; recorded on every entry.
std::uint64_t audit_sample_seed(std::uint64_t seed, std::size_t index);

/// Sum of 3 Gaussian bumps with random centres in the middle half of the box,
/// widths in [0.3, 1.5] and amplitudes in [-1, 1], rescaled so that its
/// distance to zero under `metric` is u R with u uniform in (0, 1].
GridFunction sample_audit_state(const GridFunction& prototype, double radius,
                                const std::function<double(const GridFunction&, const GridFunction&)>& metric,
                                std::mt19937_64& rng);
/// Gaussian direction scaled to Euclidean length u R.
VectorState sample_audit_state(const VectorState& prototype, double radius,
                               const std::function<double(const VectorState&, const VectorState&)>& metric,
                               std::mt19937_64& rng);

/// Input states are measured with the full metric, outputs with the trusted
/// metric. The declared bounds are evaluated at the sampled radius.
template <class State>
AuditReport alpha_beta_audit(const GeneratingFamily<State>& family, const State& prototype, std::size_t n_samples,
                             double radius, std::vector<double> t_list, std::uint64_t seed, double slack = 1e-8) {
    if (!(radius > 0.0)) throw std::invalid_argument("audit radius must be positive");
    if (t_list.empty()) throw std::invalid_argument("audit needs at least one time");
    for (double t : t_list) {
        if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("audit times must be finite and >= 0");
    }
    if (std::find(t_list.begin(), t_list.end(), 0.0) == t_list.end()) t_list.insert(t_list.begin(), 0.0);

    AuditReport rep;
    rep.family = family.name;
    rep.seed = seed;
    rep.slack = slack;
    rep.radius = radius;
    rep.samples = n_samples;
    rep.t_list = t_list;
    const State origin = zero_like(prototype);
    auto record = [&](AuditEntry e) {
        e.margin = e.declared + slack - e.measured;
        e.violated = !(e.margin >= 0.0);
        rep.violations += e.violated ? 1 : 0;
        rep.min_margin = std::min(rep.min_margin, e.margin);
        rep.entries.push_back(std::move(e));
    };

    for (std::size_t i = 0; i < n_samples; ++i) {
        const std::uint64_t sseed = audit_sample_seed(seed, i);
        std::mt19937_64 rng(sseed);
        const State x = sample_audit_state(prototype, radius, family.distance, rng);
        const State y = sample_audit_state(prototype, radius, family.distance, rng);
        const double rx = family.distance(origin, x);
        const double ry = family.distance(origin, y);
        const double rxy = std::max(rx, ry);
        const double dxy = family.distance(x, y);
        for (double t : t_list) {
            const State ix = family.step(t, x);
            const State iy = family.step(t, y);
            AuditEntry a{"alpha", rx, 0.0, t, family.output_distance(origin, ix), family.alpha(rx, t), 0.0, sseed, false};
            record(a);
            AuditEntry b{"beta", rxy, 0.0, t, family.output_distance(ix, iy), family.beta(rxy, t) * dxy, 0.0, sseed, false};
            record(b);
            if (t == 0.0) record({"identity", rx, 0.0, t, family.distance(ix, x), 0.0, 0.0, sseed, false});
        }
        // Composition laws on a sampled (R, s, t) triple.
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<std::size_t> pick(0, t_list.size() - 1);
        const double r = radius * unit(rng);
        const double s = t_list[pick(rng)];
        const double t = t_list[pick(rng)];
        const double a_lhs = family.alpha(family.alpha(r, s), t);
        const double a_rhs = family.alpha(r, s + t);
        const double a_scale = std::max(1.0, std::abs(a_rhs));
        record({"alpha_composition", r, s, t, a_lhs / a_scale, a_rhs / a_scale, 0.0, sseed, false});
        const double b_lhs = family.beta(r, s) * family.beta(r, t);
        const double b_rhs = family.beta(r, s + t);
        const double b_scale = std::max(1.0, std::abs(b_rhs));
        record({"beta_composition", r, s, t, b_lhs / b_scale, b_rhs / b_scale, 0.0, sseed, false});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Partition monotonicity

/// min over consecutive levels and nodes with max-abs coordinate within
/// min(radius, trusted radius) of u_{n+1} - u_n, u_n = I(pi_n^t) f. Levels at
/// which t is not dyadic are rejected.
double partition_monotonicity_check(const GeneratingFamily<GridFunction>& family, const GridFunction& f, double t,
                                    const std::vector<int>& levels,
                                    double radius = std::numeric_limits<double>::infinity());

/// 2 u_{n+1} - u_n for the last two levels of a Chernoff run; first-order
/// Richardson extrapolation, never used by default.
template <class State>
State richardson_limit(const GeneratingFamily<State>& family, double t, const State& x, int level) {
    const State coarse = apply_partition(family, dyadic_partition(t, level), x);
    const State fine = apply_partition(family, dyadic_partition(t, level + 1), x);
    return 2.0 * fine - coarse;
}

}  // namespace semiflow
