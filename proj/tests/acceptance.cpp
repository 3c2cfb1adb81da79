// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "semiflow/chernoff.hpp"
#include "semiflow/config.hpp"
#include "semiflow/diagnostics.hpp"
#include "semiflow/families_linear.hpp"
#include "semiflow/families_nonlinear.hpp"
#include "semiflow/runner.hpp"

using namespace semiflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

void note(Outcome& o, bool ok, const std::string& what) {
    o.pass = o.pass && ok;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += (ok ? "" : "FAILED ") + what;
}

double box_error(const GridFunction& a, const std::function<double(double)>& ref, double radius) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.grid().size(); ++i) {
        const double x = a.grid().coordinate(0, int(i));
        if (std::abs(x) <= radius + 1e-12) worst = std::max(worst, std::abs(a.at(i) - ref(x)));
    }
    return worst;
}

Grid grid_h(double x_max, double h) { return Grid::create(1, x_max, 2 * int(std::lround(x_max / h)) + 1); }

struct Shipped {
    std::string name;
    std::function<double(double, double)> defect;       // (s, t) -> defect
    std::function<double(double, double, int)> resid;   // (s, t, n) -> residual
    std::function<AuditReport(std::uint64_t)> audit;
    double tol;
};

GeneratingFamily<GridFunction> gexp_quadratic(const GridFunction& f) {
    const auto cost = CostFunction::quadratic(0.5, 1);
    return make_gexp_family(auto_lambda_grid(lipschitz_constant_estimate(f), cost), cost);
}

std::vector<HeatDriftParams> g_pairs() { return {HeatDriftParams::scalar(0.5, 0.0), HeatDriftParams::scalar(1.0, 0.0)}; }
std::vector<GbmParams> robust_pairs() { return {{0.1, 0.2}, {-0.1, 0.2}}; }

template <class State>
Shipped shipped(std::string name, GeneratingFamily<State> fam, State x, double tol) {
    Shipped s;
    s.name = std::move(name);
    s.tol = tol;
    const ChernoffOptions opts{tol, 4, 14};
    s.defect = [fam, x, opts](double a, double b) {
        const auto d = semigroup_defect(fam, a, b, x, opts);
        return d.converged ? d.defect : std::numeric_limits<double>::infinity();
    };
    s.resid = [fam, x](double a, double b, int n) { return discrete_semigroup_identity_residual(fam, a, b, n, x); };
    s.audit = [fam, x](std::uint64_t seed) {
        return alpha_beta_audit(fam, x, 100, 1.0, {0x1p-6, 0x1p-4, 0x1p-2}, seed);
    };
    return s;
}

// Default test state of every shipped family, on a coarse grid for the matrices of criteria 7-9.
std::vector<Shipped> shipped_families(double x_max, double h) {
    const Grid g = grid_h(x_max, h);
    const GridFunction bump = sample_function(Preset::gaussian_bump, g);
    const GridFunction ident = sample_function(Preset::identity, grid_h(10.0, 0.02));
    std::vector<Shipped> out;
    const double tg = 1e-3, to = 1e-4;
    out.push_back(shipped("heat", make_heat_family(HeatDriftParams::standard(1), NormSpec::sup()), bump, tg));
    out.push_back(shipped("gexp", gexp_quadratic(bump), bump, tg));
    out.push_back(shipped("g_expectation", make_g_expectation_family(g_pairs(), NormSpec::sup()), -1.0 * bump, tg));
    out.push_back(shipped("gbm", make_gbm_linear_family({0.1, 0.3}, ident.grid()), ident, tg));
    out.push_back(shipped("robust_gbm", make_robust_gbm_family(robust_pairs(), ident.grid()), ident, tg));
    out.push_back(shipped("ode_neg_identity", make_ode_family(VectorField::neg_identity(1)), VectorState{{1.0}}, to));
    out.push_back(shipped("ode_rotation", make_ode_family(VectorField::rotation()), VectorState{{1.0, 0.0}}, to));
    out.push_back(shipped("perturbation", make_perturbation_family(make_heat_family(HeatDriftParams::standard(1), NormSpec::sup()),
                                                                   PerturbationSpec::sine()),
                          bump, tg));
    return out;
}

// ---------------------------------------------------------------------------

Outcome c1_ode_exponential() {
    Outcome o;
    const auto fam = make_ode_family(VectorField::neg_identity(1));
    const auto start = std::chrono::steady_clock::now();
    const auto r = chernoff_limit(fam, 1.0, VectorState{{1.0}}, {1e-4, 4, 12});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double err = std::abs(r.state.coordinates[0] - std::exp(-1.0));
    note(o, err <= 5e-4, "|S(1)1 - e^-1| = " + num(err));
    note(o, secs < 1.0, "runtime " + num(secs) + " s");
    return o;
}

Outcome c2_ode_rotation() {
    Outcome o;
    const auto fam = make_ode_family(VectorField::rotation());
    const auto r = chernoff_limit(fam, 1.0, VectorState{{1.0, 0.0}}, {1e-4, 4, 12});
    const auto& y = r.state.coordinates;
    const double modulus = std::abs(std::hypot(y[0], y[1]) - 1.0);
    const double comp = std::max(std::abs(y[0] - std::cos(1.0)), std::abs(y[1] - std::sin(1.0)));
    note(o, modulus <= 1e-3, "||S(1)x| - 1| = " + num(modulus));
    note(o, comp <= 1e-3, "componentwise error " + num(comp));
    return o;
}

Outcome c3_heat_reduction() {
    Outcome o;
    const Grid g = grid_h(12.0, 0.01);
    const GridFunction bump = sample_function(Preset::gaussian_bump, g);
    const auto cost = CostFunction::quadratic(0.5, 1);
    const auto fam = make_gexp_family(LambdaGrid::from_values({0.0}), cost);
    const auto start = std::chrono::steady_clock::now();
    const auto r = chernoff_limit(fam, 0.5, bump, {1e-4, 4, 8});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double err = box_error(r.state, [](double x) { return oracle::heat_of_gaussian(x, 0.5); }, 4.0);
    note(o, err <= 1e-3, "sup error on |x|<=4: " + num(err));
    note(o, secs < 60.0, "runtime " + num(secs) + " s");
    return o;
}

Outcome c4_hopf_cole() {
    Outcome o;
    // Oracle first, from its own quadrature.
    std::vector<double> xs, ref;
    for (int k = -300; k <= 300; ++k) {
        xs.push_back(k * 0.01);
        ref.push_back(oracle::hopf_cole(k * 0.01, 0.25, 0.0025));
    }
    const Grid g = grid_h(8.0, 0.02);
    const GridFunction bump = sample_function(Preset::gaussian_bump, g);
    const auto cost = CostFunction::quadratic(0.5, 1);
    const auto fam = make_gexp_family(LambdaGrid::uniform(-4.0, 4.0, 0.05, 1), cost);
    const auto r = chernoff_limit(fam, 0.25, bump, {1e-4, 4, 14});
    double err = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) err = std::max(err, std::abs(interp_eval_1d(r.state, xs[i]) - ref[i]));
    note(o, r.report.converged, "converged at level " + std::to_string(r.report.n_last));
    note(o, err <= 5e-3, "sup error vs Hopf-Cole on |x|<=3: " + num(err));
    return o;
}

Outcome c5_g_heat() {
    Outcome o;
    const double dx = 0.005, x_max = 8.0;
    std::vector<double> u0;
    for (int j = 0; j <= int(std::lround(2 * x_max / dx)); ++j) {
        const double x = -x_max + j * dx;
        u0.push_back(-std::exp(-x * x));
    }
    const auto fd = oracle::g_heat_fd(u0, x_max, dx, 0.25, {0.5, 1.0});
    const Grid g = grid_h(8.0, 0.02);
    const GridFunction f = -1.0 * sample_function(Preset::gaussian_bump, g);
    const auto fam = make_g_expectation_family(g_pairs(), NormSpec::sup());
    const auto r = chernoff_limit(fam, 0.25, f, {1e-4, 4, 14});
    const double err = box_error(r.state, [&](double x) { return oracle::interpolate(fd, -x_max, dx, x); }, 3.0);
    note(o, r.report.converged, "converged at level " + std::to_string(r.report.n_last));
    note(o, err <= 1e-2, "sup error vs explicit FD on |x|<=3: " + num(err));
    return o;
}

Outcome c6_robust_gbm() {
    Outcome o;
    const Grid g = grid_h(10.0, 0.01);
    const GridFunction f = sample_function(Preset::identity, g);
    const auto fam = make_robust_gbm_family(robust_pairs(), g);
    const auto r = chernoff_limit(fam, 0.5, f, {1e-4, 4, 14});
    GridFunction ref = f;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.coordinate(0, int(i));
        ref.at(i) = x * std::exp((x >= 0.0 ? 0.1 : -0.1) * 0.5);
    }
    const double err = distance(r.state, ref, NormSpec::weighted(3.0), fam.trusted_radius);
    note(o, err <= 1e-3, "kappa error on |x|<=" + num(fam.trusted_radius) + ": " + num(err));
    return o;
}

Outcome c7_defects(const std::vector<Shipped>& families) {
    Outcome o;
    for (const auto& s : families) {
        const double d = s.defect(0.25, 0.25);
        note(o, d <= 3.0 * s.tol, s.name + " " + num(d));
    }
    return o;
}

Outcome c8_identity(const std::vector<Shipped>& families) {
    Outcome o;
    const std::vector<std::tuple<double, double, int>> probes = {
        {0.5, 0.5, 1}, {0.25, 0.75, 2}, {0.0, 0.5, 3}, {0.125, 0.375, 4}, {0.0625, 0.1875, 5}};
    for (const auto& s : families) {
        double worst = 0.0;
        for (const auto& [a, b, n] : probes) worst = std::max(worst, s.resid(a, b, n));
        note(o, worst <= 1e-12, s.name + " " + num(worst));
    }
    return o;
}

Outcome c9_audit(const std::vector<Shipped>& families) {
    Outcome o;
    std::uint64_t seed = 20240601;
    for (const auto& s : families) {
        const auto rep = s.audit(seed++);
        note(o, rep.violations == 0, s.name + " " + std::to_string(rep.violations) + " violations, min margin " + num(rep.min_margin));
    }
    return o;
}

Outcome c10_generator() {
    Outcome o;
    const Grid g = grid_h(8.0, 0.02);
    const GridFunction bump = sample_function(Preset::gaussian_bump, g);
    const std::vector<double> hs = {0x1p-4, 0x1p-5, 0x1p-6, 0x1p-7, 0x1p-8};
    const double collar = interior_collar_radius(g, hs.front());
    const auto metric = norm_metric(NormSpec::sup(), collar);
    const ChernoffOptions opts{1e-4, 4, 14};

    const auto heat = make_heat_family(HeatDriftParams::standard(1), NormSpec::sup());
    const auto th = generator_estimate(heat, bump, hs, opts, metric);
    note(o, th.entries.back().error <= 5e-2 && th.monotone_decrease, "heat " + num(th.entries.back().error));

    // Target: (1/2) f'' + (1/2) (f')^2 evaluated analytically.
    GridFunction target = bump;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.coordinate(0, int(i)), e = std::exp(-x * x);
        const double d1 = -2.0 * x * e, d2 = (4.0 * x * x - 2.0) * e;
        target.at(i) = 0.5 * d2 + 0.5 * d1 * d1;
    }
    const auto cost = CostFunction::quadratic(0.5, 1);
    const auto gexp = make_gexp_family(LambdaGrid::uniform(-4.0, 4.0, 0.05, 1), cost);
    const auto tg = generator_estimate(gexp, bump, target, hs, opts, metric);
    note(o, tg.entries.back().error <= 5e-2 && tg.monotone_decrease, "gexp " + num(tg.entries.back().error));

    const auto ode = make_ode_family(VectorField::neg_identity(1));
    const auto to = generator_estimate(ode, VectorState{{1.0}}, {0x1p-6, 0x1p-7, 0x1p-8, 0x1p-9, 0x1p-10}, ChernoffOptions{1e-4, 4, 20});
    note(o, to.entries.back().error <= 1e-3 && to.monotone_decrease, "ode " + num(to.entries.back().error));
    return o;
}

Outcome c11_condition() {
    Outcome o;
    const Grid g = grid_h(6.0, 0.05);
    const GridFunction bump = sample_function(Preset::gaussian_bump, g);
    const std::vector<double> lambdas = {1.0, 0.5, 0.1};
    const std::vector<int> levels = {6, 7, 8};
    const auto gexp = gexp_quadratic(bump);
    const double small = gen_condition_probe(gexp, bump, bump, 0x1p-6, lambdas, levels);
    const double large = gen_condition_probe(gexp, bump, bump, 0x1p-2, lambdas, levels);
    note(o, small < large, "gexp probe " + num(small) + " at 2^-6 < " + num(large) + " at 2^-2");

    const auto cost = CostFunction::quadratic(0.5, 1);
    const auto lin = make_gexp_family(LambdaGrid::from_values({0.0}), cost);
    const GridFunction y = sample_function(Preset::cauchy_bump, g);
    double gap = 0.0;
    for (double t0 : {0x1p-6, 0x1p-2}) {
        const double probe = gen_condition_probe(lin, bump, y, t0, lambdas, levels);
        double direct = 0.0;
        for (int n : levels) {
            GridFunction u = y;
            for (int k = 1; k <= int(std::ldexp(t0, n)); ++k) {
                u = lin.step(std::ldexp(1.0, -n), u);
                direct = std::max(direct, lin.output_distance(u, y));
            }
        }
        gap = std::max(gap, std::abs(probe - direct));
    }
    note(o, gap <= 1e-12, "linear identity gap " + num(gap));
    return o;
}

Outcome c12_certificates() {
    Outcome o;
    const Grid g = grid_h(6.0, 0.02);
    const GridFunction bump = sample_function(Preset::gaussian_bump, g);
    const GridFunction hat = sample_function(Preset::hat, g);
    const std::vector<int> levels = {3, 4, 5, 6, 7, 8};
    const auto fb = gexp_quadratic(bump);
    const auto cb = symmetric_lipschitz_certificate(fb, bump, 0.25, levels, "gaussian_bump");
    note(o, cb.joint == Verdict::bounded, "bump joint " + std::string(to_string(cb.joint)) + " gamma " + num(cb.plus.gamma_hat));
    const auto fh = gexp_quadratic(hat);
    const auto ch = symmetric_lipschitz_certificate(fh, hat, 0.25, levels, "hat");
    double growth = 1e300;
    for (const auto* c : {&ch.plus, &ch.minus}) {
        for (std::size_t i = c->growth.size() - 3; i < c->growth.size(); ++i) growth = std::min(growth, c->growth[i]);
    }
    note(o, ch.joint == Verdict::diverging && growth >= 1.2,
         "hat joint " + std::string(to_string(ch.joint)) + " min growth " + num(growth));
    const auto inv = invariance_probe(fb, bump, 0.25, 0.25, levels, {1e-3, 4, 14}, "S(0.25)bump");
    note(o, inv.certificate.joint == Verdict::bounded, "invariance " + std::string(to_string(inv.certificate.joint)));
    return o;
}

Outcome c13_monotonicity() {
    Outcome o;
    const Grid g = grid_h(6.0, 0.02);
    const GridFunction bump = sample_function(Preset::gaussian_bump, g);
    const std::vector<int> levels = {1, 2, 3, 4, 5, 6};
    // Kernel comparisons exclude the collar of the coarsest step.
    const double collar = interior_collar_radius(g, std::ldexp(0.5, -levels.front()));
    const auto gexp = make_gexp_family(LambdaGrid::from_values({-1.0, 0.0, 1.0}), CostFunction::indicator(-1.0, 1.0, 1));
    const double m1 = partition_monotonicity_check(gexp, bump, 0.5, levels, collar);
    note(o, m1 >= -1e-10, "gexp " + num(m1));
    const auto gx = make_g_expectation_family(g_pairs(), NormSpec::sup());
    const double m2 = partition_monotonicity_check(gx, -1.0 * bump, 0.5, levels, collar);
    note(o, m2 >= -1e-10, "g_expectation " + num(m2));
    const Grid gb = grid_h(10.0, 0.02);
    const auto rg = make_robust_gbm_family(robust_pairs(), gb);
    const double m3 = partition_monotonicity_check(rg, sample_function(Preset::identity, gb), 0.5, levels);
    note(o, m3 >= -1e-10, "robust_gbm " + num(m3));
    return o;
}

Outcome c14_telescoping() {
    Outcome o;
    // Wide box: heat mass must not reach the edge by t = 1.
    const Grid g = grid_h(14.0, 0.05);
    const GridFunction f = sample_function(Preset::gaussian_bump, g);
    const GridFunction h = sample_function(Preset::hat, g) - 0.5 * f;
    const auto heat = make_heat_family(HeatDriftParams::standard(1), NormSpec::sup());
    double worst = 0.0;
    for (int n = 1; n <= 4; ++n) {
        for (int k = 1; k <= (1 << n); ++k) worst = std::max(worst, telescoping_residual(heat, PerturbationSpec::sine(), f, h, k, n));
    }
    note(o, worst <= 1e-10, "residual " + num(worst));
    const auto fam = make_perturbation_family(make_identity_family(NormSpec::sup()), PerturbationSpec::neg_identity());
    double err = 0.0;
    for (double t : {0.25, 0.5, 1.0}) {
        const auto r = chernoff_limit(fam, t, f, {1e-4, 4, 16});
        err = std::max(err, distance(r.state, std::exp(-t) * f, NormSpec::sup()));
    }
    note(o, err <= 5e-4, "identity base with Psi(u)=-u vs e^-t f: " + num(err));
    return o;
}

Outcome c15_determinism() {
    Outcome o;
    const fs::path dir = fs::path(SEMIFLOW_CONFIG_DIR);
    const fs::path root = fs::temp_directory_path() / "semiflow_acceptance_determinism";
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".json" && e.path().stem().string().rfind("acceptance_", 0) == 0) {
            names.push_back(e.path().filename().string());
        }
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) note(o, false, "no acceptance configs found in " + dir.string());
    std::size_t files = 0;
    for (const auto& name : names) {
        const auto spec = parse_config(dir / name);
        const auto a = run_experiment(spec, root / "a" / spec.name);
        const auto b = run_experiment(spec, root / "b" / spec.name);
        bool same = a.artifacts.size() == b.artifacts.size();
        for (std::size_t i = 0; same && i < a.artifacts.size(); ++i) {
            same = a.artifacts[i].file == b.artifacts[i].file && a.artifacts[i].sha256 == b.artifacts[i].sha256;
            if (a.artifacts[i].file.ends_with(".csv")) ++files;
        }
        if (!same) note(o, false, spec.name + " differs between runs");
    }
    fs::remove_all(root);
    note(o, files > 0, std::to_string(names.size()) + " configs, " + std::to_string(files) + " CSVs byte-identical");
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* title;
        std::function<Outcome()> run;
    };
    std::vector<Shipped> families;
    auto lazy_families = [&]() -> const std::vector<Shipped>& {
        if (families.empty()) families = shipped_families(6.0, 0.05);
        return families;
    };
    const std::vector<Criterion> criteria = {
        {1, "ODE exponential", c1_ode_exponential},
        {2, "ODE rotation", c2_ode_rotation},
        {3, "linear heat reduction", c3_heat_reduction},
        {4, "Hopf-Cole oracle", c4_hopf_cole},
        {5, "G-heat cross-check", c5_g_heat},
        {6, "robust GBM moment identity", c6_robust_gbm},
        {7, "semigroup defect", [&] { return c7_defects(lazy_families()); }},
        {8, "exact discrete identity", [&] { return c8_identity(lazy_families()); }},
        {9, "alpha/beta audit", [&] { return c9_audit(lazy_families()); }},
        {10, "generator consistency", c10_generator},
        {11, "difference-quotient condition", c11_condition},
        {12, "Lipschitz-set certificates", c12_certificates},
        {13, "partition monotonicity", c13_monotonicity},
        {14, "telescoping identity", c14_telescoping},
        {15, "determinism", c15_determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
