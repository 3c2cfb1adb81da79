#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracle {

double heat_of_gaussian(double x, double t, double sigma, double drift) {
    const double spread = 1.0 + 2.0 * sigma * sigma * t;
    const double y = x + drift * t;
    return std::exp(-y * y / spread) / std::sqrt(spread);
}

namespace {

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double Phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// E[(a + W)^+ ... ] pieces: integral of (c + y) over y in [lo, hi] against N(0, s^2) where y = x + W.
double linear_piece(double x, double s, double lo, double hi, double c0, double c1) {
    // E[(c0 + c1 Y) 1{lo <= Y <= hi}], Y ~ N(x, s^2)
    const double a = (lo - x) / s, b = (hi - x) / s;
    const double mass = Phi(b) - Phi(a);
    const double first = x * mass + s * (phi(a) - phi(b));
    return c0 * mass + c1 * first;
}

}  // namespace

double heat_of_hat(double x, double t) {
    if (t == 0.0) return std::max(0.0, 1.0 - std::abs(x));
    const double s = std::sqrt(t);
    return linear_piece(x, s, -1.0, 0.0, 1.0, 1.0) + linear_piece(x, s, 0.0, 1.0, 1.0, -1.0);
}

double hopf_cole(double x, double t, double dy) {
    if (t == 0.0) return std::exp(-x * x);
    const double s = std::sqrt(t);
    const int n = int(std::ceil(12.0 * s / dy));
    double acc = 0.0;
    for (int k = -n; k <= n; ++k) {
        const double w = k * dy;
        const double weight = (k == -n || k == n) ? 0.5 : 1.0;
        const double y = x + w;
        acc += weight * std::exp(-0.5 * w * w / t) * std::exp(std::exp(-y * y));
    }
    return std::log(acc * dy / std::sqrt(2.0 * std::numbers::pi * t));
}

std::vector<double> g_heat_fd(const std::vector<double>& u0, double x_max, double dx, double t,
                              const std::vector<double>& sigmas) {
    double s_max = 0.0;
    for (double s : sigmas) s_max = std::max(s_max, std::abs(s));
    if (s_max == 0.0) return u0;
    const int steps = int(std::ceil(t / (0.4 * dx * dx / (s_max * s_max))));
    const double dt = t / steps;
    std::vector<double> u = u0, next(u.size());
    const std::size_t n = u.size();
    if (std::abs((n - 1) * dx - 2.0 * x_max) > 1e-9) throw std::invalid_argument("grid mismatch");
    for (int k = 0; k < steps; ++k) {
        next[0] = 0.0;
        next[n - 1] = 0.0;
        for (std::size_t j = 1; j + 1 < n; ++j) {
            const double d2 = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (dx * dx);
            double best = -1e300;
            for (double s : sigmas) best = std::max(best, 0.5 * s * s * d2);
            next[j] = u[j] + dt * best;
        }
        std::swap(u, next);
    }
    return u;
}

double interpolate(const std::vector<double>& v, double x_min, double dx, double x) {
    const double u = (x - x_min) / dx;
    const long j = std::clamp(long(std::floor(u)), 0L, long(v.size()) - 2);
    const double w = u - double(j);
    return (1.0 - w) * v[std::size_t(j)] + w * v[std::size_t(j) + 1];
}

}  // namespace oracle
