#include <doctest.h>

#include <cmath>
#include <numeric>

#include "semiflow/gauss_hermite.hpp"
#include "semiflow/lattice_kernel.hpp"

using namespace semiflow;

namespace {

double mass(const LatticeKernel& k) { return std::accumulate(k.weights.begin(), k.weights.end(), 0.0); }

double moment(const LatticeKernel& k, int p) {
    double m = 0.0;
    for (std::size_t i = 0; i < k.weights.size(); ++i) m += k.weights[i] * std::pow(double(k.offset_lo + int(i)), p);
    return m;
}

LatticeKernel convolve(const LatticeKernel& a, const LatticeKernel& b) {
    LatticeKernel c;
    c.offset_lo = a.offset_lo + b.offset_lo;
    c.weights.assign(a.weights.size() + b.weights.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.weights.size(); ++i) {
        for (std::size_t j = 0; j < b.weights.size(); ++j) c.weights[i + j] += a.weights[i] * b.weights[j];
    }
    return c;
}

double weight(const LatticeKernel& k, int j) {
    if (j < k.offset_lo || j > k.offset_hi()) return 0.0;
    return k.weights[std::size_t(j - k.offset_lo)];
}

}  // namespace

TEST_CASE("scaled bessel values match the standard library") {
    for (double z : {0.01, 0.7, 5.0, 40.0}) {
        const auto logs = log_scaled_bessel_i(z, 12);
        for (int j = 0; j <= 12; ++j) {
            const double ref = std::cyl_bessel_i(double(j), z) * std::exp(-z);
            if (ref < 1e-280) continue;
            CHECK(std::exp(logs[std::size_t(j)]) == doctest::Approx(ref).epsilon(1e-11));
        }
    }
}

TEST_CASE("skellam mass and moments") {
    const auto k = skellam_kernel(3.0, 1.5);
    CHECK(mass(k) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(moment(k, 1) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(moment(k, 2) - 1.5 * 1.5 == doctest::Approx(4.5).epsilon(1e-11));
    for (double w : k.weights) CHECK(w >= 0.0);
}

TEST_CASE("kernel at t = 0 is a unit mass") {
    const auto k = lattice_heat_kernel(0.0, 1.0, 0.3, 0.1);
    REQUIRE(k.weights.size() == 1);
    CHECK(k.offset_lo == 0);
    CHECK(k.weights[0] == 1.0);
}

TEST_CASE("kernel reproduces the heat moments") {
    const double h = 0.05, t = 0.3, sigma = 0.8, drift = 0.4;
    const auto k = lattice_heat_kernel(t, sigma, drift, h);
    CHECK(h * moment(k, 1) == doctest::Approx(drift * t).epsilon(1e-12));
    const double var = h * h * moment(k, 2) - std::pow(h * moment(k, 1), 2);
    CHECK(var == doctest::Approx(sigma * sigma * t).epsilon(1e-10));
}

TEST_CASE("upwind rates for strong drift") {
    const auto central = jump_rates(1.0, 1.0, 0.5);
    CHECK(central.right - central.left == doctest::Approx(2.0));
    CHECK(central.right + central.left == doctest::Approx(4.0));
    const auto up = jump_rates(0.1, 5.0, 0.5);
    CHECK(up.left >= 0.0);
    CHECK(up.right >= 0.0);
    CHECK((up.right - up.left) * 0.5 == doctest::Approx(5.0));
}

TEST_CASE("kernels compose exactly") {
    const double h = 0.1;
    const auto a = lattice_heat_kernel(0.25, 1.0, -0.5, h);
    const auto b = lattice_heat_kernel(0.5, 1.0, -0.5, h);
    const auto ab = lattice_heat_kernel(0.75, 1.0, -0.5, h);
    const auto c = convolve(a, b);
    double worst = 0.0;
    for (int j = c.offset_lo; j <= c.offset_hi(); ++j) worst = std::max(worst, std::abs(weight(c, j) - weight(ab, j)));
    CHECK(worst < 1e-13);
}

TEST_CASE("gauss hermite integrates polynomials") {
    const auto rule = gauss_hermite_rule(20);
    double m0 = 0.0, m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double z = rule.nodes[i], w = rule.weights[i];
        m0 += w;
        m2 += w * z * z;
        m4 += w * z * z * z * z;
    }
    const double sp = std::sqrt(std::acos(-1.0));
    CHECK(m0 == doctest::Approx(sp).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(sp / 2).epsilon(1e-13));
    CHECK(m4 == doctest::Approx(3 * sp / 4).epsilon(1e-13));
    CHECK_THROWS(gauss_hermite_rule(0));
}
