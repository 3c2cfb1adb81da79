/**
 * @file chernoff.hpp
 * @brief Dyadic Chernoff iteration S(t)x = lim_n I(2^-n)^{t 2^n} x.
 *
 * The engine is generic over the state type. A state type needs the free
 * functions `zero_like`, `all_finite`, and the pointwise operators declared in
 * state_space.hpp.
 *
 * Cost doubles with every level: level n at time t performs t*2^n step calls,
 * and chernoff_limit recomputes every level from scratch, so the default
 * n_max = 14 can mean tens of thousands of steps per call.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "semiflow/state_space.hpp"

namespace semiflow {

/// One-step operator I(t) plus the bound data it declares.
template <class State>
struct GeneratingFamily {
    using Step = std::function<State(double, const State&)>;
    using Metric = std::function<double(const State&, const State&)>;
    using Bound = std::function<double(double, double)>;

    std::string name;
    Step step;
    /// Metric of the state space.
    Metric distance;
    /// Metric restricted to where outputs are trusted (e.g. away from a
    /// truncated domain). Empty means `distance`.
    Metric trusted_distance;
    /// Max-norm radius of the trusted node region (grid families only).
    double trusted_radius = std::numeric_limits<double>::infinity();
    Bound alpha;       ///< I(t): B(x0,R) -> B(x0, alpha(R,t))
    Bound beta;        ///< d(I(t)x, I(t)y) <= beta(R,t) d(x,y) on B(x0,R)
    Bound lip_growth;  ///< optional: I(t) maps Lip(c) into Lip(rho(c,t))
    std::function<State(const State&)> analytic_generator;  ///< optional
    bool minus_conjugate = false;  ///< order-based: I^-(t)x = -I(t)(-x) is meaningful
    bool sup_type = false;         ///< supremum of monotone linear semigroups
    bool linear = false;

    double output_distance(const State& a, const State& b) const {
        return trusted_distance ? trusted_distance(a, b) : distance(a, b);
    }
};

/// I^-(t)x := -I(t)(-x). Only meaningful for minus_conjugate families.
template <class State>
GeneratingFamily<State> minus_conjugate(const GeneratingFamily<State>& family) {
    if (!family.minus_conjugate) {
        throw std::invalid_argument("family '" + family.name + "' has no order-conjugate counterpart");
    }
    GeneratingFamily<State> out = family;
    out.name = family.name + "^-";
    out.step = [step = family.step](double t, const State& x) { return -step(t, -x); };
    if (family.analytic_generator) {
        out.analytic_generator = [gen = family.analytic_generator](const State& x) { return -gen(-x); };
    }
    return out;
}

class NonDyadicTime : public std::invalid_argument {
public:
    NonDyadicTime(double t, int level, int smallest_level)
        : std::invalid_argument(message(t, level, smallest_level)), t_(t), level_(level),
          smallest_level_(smallest_level) {}
    double time() const { return t_; }
    int level() const { return level_; }
    /// Smallest level at which t is dyadic, or -1 if none exists.
    int smallest_level() const { return smallest_level_; }

private:
    static std::string message(double t, int level, int smallest) {
        std::string m = "time " + format_double(t) + " is not a multiple of 2^-" + std::to_string(level);
        if (smallest >= 0) m += " (smallest admissible level: " + std::to_string(smallest) + ")";
        return m;
    }
    double t_;
    int level_;
    int smallest_level_;
};

class NonFiniteState : public std::runtime_error {
public:
    explicit NonFiniteState(std::int64_t step_index)
        : std::runtime_error("non-finite state produced at step " + std::to_string(step_index)),
          step_index_(step_index) {}
    std::int64_t step_index() const { return step_index_; }

private:
    std::int64_t step_index_;
};

/// Smallest n with t * 2^n integral, or -1 when t is not a finite nonnegative dyadic.
inline int dyadic_level(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) return -1;
    for (int n = 0; n <= 1100; ++n) {
        const double scaled = std::ldexp(t, n);
        if (scaled == std::floor(scaled)) return n;
    }
    return -1;
}

struct DyadicPartition {
    double t = 0.0;
    int level = 0;
    std::int64_t steps = 0;

    double step_size() const { return std::ldexp(1.0, -level); }
};

inline DyadicPartition dyadic_partition(double t, int level) {
    if (level < 0) throw std::invalid_argument("partition level must be >= 0");
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("partition time must be finite and >= 0");
    const double scaled = std::ldexp(t, level);
    if (scaled != std::floor(scaled)) throw NonDyadicTime(t, level, dyadic_level(t));
    if (scaled > 0x1p62) throw std::invalid_argument("partition has too many steps");
    return {t, level, std::int64_t(scaled)};
}

/// k-fold composition of I(2^-n); k = 0 returns the input unchanged.
template <class State>
State apply_partition(const GeneratingFamily<State>& family, const DyadicPartition& partition, const State& x) {
    State u = x;
    const double dt = partition.step_size();
    for (std::int64_t k = 0; k < partition.steps; ++k) {
        u = family.step(dt, u);
        if (!all_finite(u)) throw NonFiniteState(k);
    }
    return u;
}

struct ChernoffOptions {
    double tol = 1e-4;
    int n_min = 4;
    int n_max = 14;
};

struct ConvergenceReport {
    double t = 0.0;
    int n_min = 0;
    int n_last = 0;
    double tol = 0.0;
    std::vector<double> deltas;  ///< deltas[i] = d(u_{n_min+i+1}, u_{n_min+i})
    bool converged = false;
    std::int64_t steps_total = 0;
};

template <class State>
struct ChernoffResult {
    State state;
    ConvergenceReport report;
};

/// Computes u_n = I(pi_n^t)x for n = n_min, n_min+1, ... and stops at the
/// first level whose successive distance is <= tol. The full sequence is
/// tested; no subsequence is searched when it fails to settle.
template <class State>
ChernoffResult<State> chernoff_limit(const GeneratingFamily<State>& family, double t, const State& x,
                                     const ChernoffOptions& opts) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("Chernoff tolerance must be positive");
    if (opts.n_min < 0 || opts.n_min > opts.n_max) throw std::invalid_argument("need 0 <= n_min <= n_max");
    const DyadicPartition first = dyadic_partition(t, opts.n_min);

    ConvergenceReport report;
    report.t = t;
    report.n_min = opts.n_min;
    report.n_last = opts.n_min;
    report.tol = opts.tol;
    if (t == 0.0) {
        report.converged = true;
        return {x, report};
    }
    State prev = apply_partition(family, first, x);
    report.steps_total = first.steps;
    for (int n = opts.n_min + 1; n <= opts.n_max; ++n) {
        const DyadicPartition part = dyadic_partition(t, n);
        State next = apply_partition(family, part, x);
        report.steps_total += part.steps;
        report.n_last = n;
        const double delta = family.output_distance(next, prev);
        report.deltas.push_back(delta);
        prev = std::move(next);
        if (delta <= opts.tol) {
            report.converged = true;
            break;
        }
    }
    return {std::move(prev), report};
}

struct DefectResult {
    double defect = 0.0;
    bool converged = false;  ///< all three Chernoff limits met their tolerance
};

/// d(S(s+t)x, S(s)S(t)x) with every S evaluated by chernoff_limit.
template <class State>
DefectResult semigroup_defect(const GeneratingFamily<State>& family, double s, double t, const State& x,
                              const ChernoffOptions& opts) {
    const auto whole = chernoff_limit(family, s + t, x, opts);
    const auto inner = chernoff_limit(family, t, x, opts);
    const auto outer = chernoff_limit(family, s, inner.state, opts);
    return {family.output_distance(whole.state, outer.state),
            whole.report.converged && inner.report.converged && outer.report.converged};
}

/// d(I(pi_n^{s+t})x, I(pi_n^s) I(pi_n^t) x); zero up to floating point.
template <class State>
double discrete_semigroup_identity_residual(const GeneratingFamily<State>& family, double s, double t, int n,
                                            const State& x) {
    const State whole = apply_partition(family, dyadic_partition(s + t, n), x);
    const State inner = apply_partition(family, dyadic_partition(t, n), x);
    const State outer = apply_partition(family, dyadic_partition(s, n), inner);
    return family.output_distance(whole, outer);
}

template <class State>
struct PathResult {
    std::vector<State> states;
    std::vector<ConvergenceReport> reports;
};

/// States at strictly increasing dyadic times, each increment one chernoff_limit.
template <class State>
PathResult<State> evolve_path(const GeneratingFamily<State>& family, const std::vector<double>& times,
                              const State& x, const ChernoffOptions& opts) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        dyadic_partition(times[i], opts.n_min);
        if (i > 0 && !(times[i] > times[i - 1])) throw std::invalid_argument("evolution times must increase strictly");
    }
    PathResult<State> out;
    State current = x;
    double now = 0.0;
    for (double t : times) {
        auto r = chernoff_limit(family, t - now, current, opts);
        current = r.state;
        now = t;
        out.states.push_back(std::move(r.state));
        out.reports.push_back(std::move(r.report));
    }
    return out;
}

}  // namespace semiflow
