#include "semiflow/lattice_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace semiflow {

namespace {

constexpr double kTailMass = 1e-17;

double log_sum_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

LatticeKernel trim(int lo, std::vector<double> p) {
    std::size_t first = 0, last = p.size();
    double tail = 0.0;
    while (first + 1 < last && tail + p[first] < kTailMass) tail += p[first++];
    tail = 0.0;
    while (last - 1 > first && tail + p[last - 1] < kTailMass) tail += p[--last];
    LatticeKernel k;
    k.offset_lo = lo + int(first);
    k.weights.assign(p.begin() + std::ptrdiff_t(first), p.begin() + std::ptrdiff_t(last));
    return k;
}

LatticeKernel poisson_kernel(double mean, int sign) {
    const int j_max = int(std::ceil(mean + 14.0 * std::sqrt(mean) + 40.0));
    std::vector<double> p(std::size_t(j_max) + 1);
    const double log_mean = std::log(mean);
    for (int j = 0; j <= j_max; ++j) p[std::size_t(j)] = std::exp(-mean + j * log_mean - std::lgamma(j + 1.0));
    if (sign > 0) return trim(0, std::move(p));
    std::reverse(p.begin(), p.end());
    return trim(-j_max, std::move(p));
}

}  // namespace

std::vector<double> log_scaled_bessel_i(double z, int j_max) {
    if (!(z > 0.0)) throw std::invalid_argument("log_scaled_bessel_i needs z > 0");
    // Start far enough above j_max that the recurrence has converged onto I_j.
    const int start = j_max + 30 + int(std::ceil(6.0 * std::sqrt(z)));
    std::vector<double> logv(std::size_t(start) + 2, -std::numeric_limits<double>::infinity());
    double v_next = 0.0, v = 1.0, log_offset = 0.0;
    logv[std::size_t(start)] = 0.0;
    for (int j = start; j >= 1; --j) {
        double v_prev = (2.0 * j / z) * v + v_next;
        v_next = v;
        v = v_prev;
        if (v > 1e200) {
            v *= 1e-200;
            v_next *= 1e-200;
            log_offset += 200.0 * std::log(10.0);
        }
        logv[std::size_t(j - 1)] = std::log(v) + log_offset;
    }
    // sum_{j in Z} I_j(z) = e^z fixes the normalisation.
    double log_total = logv[0];
    for (int j = 1; j <= start; ++j) log_total = log_sum_exp(log_total, std::log(2.0) + logv[std::size_t(j)]);
    std::vector<double> out(std::size_t(j_max) + 1);
    for (int j = 0; j <= j_max; ++j) out[std::size_t(j)] = logv[std::size_t(j)] - log_total;
    return out;
}

LatticeKernel skellam_kernel(double mean_right, double mean_left) {
    if (!(mean_right >= 0.0) || !(mean_left >= 0.0) || !std::isfinite(mean_right) || !std::isfinite(mean_left)) {
        throw std::invalid_argument("Skellam means must be finite and nonnegative");
    }
    if (mean_right == 0.0 && mean_left == 0.0) return {0, {1.0}};
    if (mean_left == 0.0) return poisson_kernel(mean_right, +1);
    if (mean_right == 0.0) return poisson_kernel(mean_left, -1);

    const double mean = mean_right - mean_left;
    const double sd = std::sqrt(mean_right + mean_left);
    const int lo = int(std::floor(mean - 14.0 * sd - 40.0));
    const int hi = int(std::ceil(mean + 14.0 * sd + 40.0));
    const int j_max = std::max(std::abs(lo), std::abs(hi));
    const double z = 2.0 * std::sqrt(mean_right * mean_left);
    const auto log_i = log_scaled_bessel_i(z, j_max);
    const double half_log_ratio = 0.5 * (std::log(mean_right) - std::log(mean_left));
    const double root_gap = std::sqrt(mean_right) - std::sqrt(mean_left);
    const double shift = -root_gap * root_gap;

    std::vector<double> p(std::size_t(hi - lo) + 1);
    for (int j = lo; j <= hi; ++j) {
        p[std::size_t(j - lo)] = std::exp(log_i[std::size_t(std::abs(j))] + j * half_log_ratio + shift);
    }
    return trim(lo, std::move(p));
}

JumpRates jump_rates(double sigma, double drift, double h) {
    const double diffusive = sigma * sigma / (2.0 * h * h);
    if (std::abs(drift) * h <= sigma * sigma) {
        return {diffusive + drift / (2.0 * h), std::max(0.0, diffusive - drift / (2.0 * h))};
    }
    return {diffusive + std::max(drift, 0.0) / h, diffusive + std::max(-drift, 0.0) / h};
}

LatticeKernel lattice_heat_kernel(double t, double sigma, double drift, double h) {
    if (t < 0.0) throw std::invalid_argument("kernel time must be nonnegative");
    if (!(h > 0.0)) throw std::invalid_argument("lattice spacing must be positive");
    if (t == 0.0) return {0, {1.0}};
    const JumpRates r = jump_rates(sigma, drift, h);
    return skellam_kernel(r.right * t, r.left * t);
}

}  // namespace semiflow
