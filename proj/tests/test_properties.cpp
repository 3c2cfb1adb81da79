// Randomized invariants over the state space and the generating families.

#include <doctest.h>

#include <cmath>
#include <random>

#include "semiflow/chernoff.hpp"
#include "semiflow/diagnostics.hpp"
#include "semiflow/families_nonlinear.hpp"

using namespace semiflow;

namespace {

GridFunction random_state(const Grid& g, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    GridFunction f(g, 1, Extension::zero);
    // smooth-ish: random combination of bumps
    for (int b = 0; b < 4; ++b) {
        const double c = n(rng), w = 0.5 + std::abs(n(rng)), a = n(rng);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = g.coordinate(0, int(i)) - c;
            f.at(i) += a * std::exp(-x * x / (w * w));
        }
    }
    return f;
}

}  // namespace

TEST_CASE("metric axioms") {
    std::mt19937_64 rng(1);
    const Grid g = Grid::create(1, 5.0, 101);
    for (const NormSpec& norm : {NormSpec::sup(), NormSpec::weighted(2.0), NormSpec::weighted(3.5)}) {
        for (int trial = 0; trial < 20; ++trial) {
            const auto a = random_state(g, rng), b = random_state(g, rng), c = random_state(g, rng);
            CHECK(distance(a, a, norm) == 0.0);
            CHECK(distance(a, b, norm) == distance(b, a, norm));
            CHECK(distance(a, c, norm) <= distance(a, b, norm) + distance(b, c, norm) + 1e-15);
            CHECK(distance(2.0 * a, 2.0 * b, norm) == doctest::Approx(2.0 * distance(a, b, norm)));
            CHECK(distance(a, b, NormSpec::weighted(norm.kind == NormSpec::Kind::sup ? 2.0 : norm.p)) <=
                  distance(a, b, NormSpec::sup()));
        }
    }
}

TEST_CASE("interpolation is exact on affine functions") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const Grid g = Grid::create(2, 3.0, 31);
    for (int trial = 0; trial < 10; ++trial) {
        const double a = u(rng), b = u(rng), c = u(rng);
        GridFunction f(g, 1, Extension::zero);
        for (std::size_t n = 0; n < g.size(); ++n) f.at(n) = a + b * g.point(n)[0] + c * g.point(n)[1];
        for (int k = 0; k < 20; ++k) {
            const double p[2] = {u(rng), u(rng)};
            CHECK(interp_eval(f, p)[0] == doctest::Approx(a + b * p[0] + c * p[1]).epsilon(1e-12));
        }
    }
}

TEST_CASE("sup-norm families are nonexpansive on random pairs") {
    std::mt19937_64 rng(3);
    const Grid g = Grid::create(1, 6.0, 121);
    const auto q = CostFunction::quadratic(0.5, 1);
    const std::vector<GeneratingFamily<GridFunction>> fams = {
        make_heat_family(HeatDriftParams::scalar(0.8, 0.3), NormSpec::sup()),
        make_gexp_family(LambdaGrid::uniform(-2.0, 2.0, 0.25, 1), q),
        make_g_expectation_family({HeatDriftParams::scalar(0.5, 0.0), HeatDriftParams::scalar(1.0, 0.2)}, NormSpec::sup()),
    };
    for (const auto& fam : fams) {
        for (int trial = 0; trial < 10; ++trial) {
            const auto a = random_state(g, rng), b = random_state(g, rng);
            for (double t : {0x1p-6, 0x1p-3, 0.5}) {
                CHECK(distance(fam.step(t, a), fam.step(t, b), NormSpec::sup()) <=
                      fam.beta(1.0, t) * distance(a, b, NormSpec::sup()) + 1e-12);
            }
        }
    }
}

TEST_CASE("sup-type steps are monotone and commute with constants") {
    std::mt19937_64 rng(4);
    const Grid g = Grid::create(1, 6.0, 121);
    const auto fam = make_gexp_family(LambdaGrid::uniform(-2.0, 2.0, 0.25, 1), CostFunction::quadratic(0.5, 1));
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_state(g, rng);
        auto b = a;
        for (std::size_t i = 0; i < g.size(); ++i) b.at(i) += std::abs(random_state(g, rng).at(i));
        const auto ua = fam.step(0.125, a), ub = fam.step(0.125, b);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(ub.at(i) >= ua.at(i) - 1e-14);
    }
}

TEST_CASE("level refinement keeps the discrete identity") {
    std::mt19937_64 rng(5);
    const Grid g = Grid::create(1, 6.0, 121);
    const auto fam = make_perturbation_family(make_heat_family(HeatDriftParams::standard(1), NormSpec::sup()),
                                              PerturbationSpec::sine());
    const auto x = random_state(g, rng);
    for (int n = 2; n <= 6; ++n) CHECK(discrete_semigroup_identity_residual(fam, 0.25, 0.5, n, x) == 0.0);
}

TEST_CASE("audit holds on random seeds") {
    const Grid g = Grid::create(1, 5.0, 101);
    const auto proto = sample_function(Preset::gaussian_bump, g);
    const auto fam = make_g_expectation_family({HeatDriftParams::scalar(0.5, 0.0), HeatDriftParams::scalar(1.0, 0.0)},
                                               NormSpec::weighted(2.0));
    for (std::uint64_t seed : {1u, 99u, 12345u}) {
        const auto rep = alpha_beta_audit(fam, proto, 15, 2.0, {0x1p-4, 0.5}, seed);
        CHECK(rep.violations == 0);
    }
    const auto ode = make_ode_family(VectorField::neg_identity(3));
    for (std::uint64_t seed : {2u, 7u}) CHECK(alpha_beta_audit(ode, VectorState{{0, 0, 0}}, 30, 5.0, {0.5, 1.0}, seed).violations == 0);
}

TEST_CASE("csv round trip of random states") {
    std::mt19937_64 rng(6);
    const Grid g = Grid::create(1, 3.0, 61);
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = random_state(g, rng, 1e3);
        CHECK(grid_function_from_csv(parse_csv(to_csv(f)), Extension::zero) == f);
    }
}
