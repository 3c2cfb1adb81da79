#include "semiflow/gauss_hermite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace semiflow {

GaussHermiteRule gauss_hermite_rule(int n) {
    if (n < 1 || n > 256) throw std::invalid_argument("Gauss-Hermite order must be in [1, 256]");
    GaussHermiteRule rule;
    rule.nodes.assign(std::size_t(n), 0.0);
    rule.weights.assign(std::size_t(n), 0.0);
    const double pim4 = std::pow(std::numbers::pi, -0.25);
    const int half = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        // Standard initial guesses for the largest roots, then extrapolation.
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        } else if (i == 1) {
            z -= 1.14 * std::pow(double(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.nodes[1];
        } else {
            z = 2.0 * z - rule.nodes[std::size_t(i - 2)];
        }
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt(double(j - 1) / j) * p3;
            }
            dp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        rule.nodes[std::size_t(i)] = z;
        rule.nodes[std::size_t(n - 1 - i)] = -z;
        rule.weights[std::size_t(i)] = 2.0 / (dp * dp);
        rule.weights[std::size_t(n - 1 - i)] = rule.weights[std::size_t(i)];
    }
    if (n % 2 == 1) rule.nodes[std::size_t(n / 2)] = 0.0;
    std::reverse(rule.nodes.begin(), rule.nodes.end());
    std::reverse(rule.weights.begin(), rule.weights.end());
    return rule;
}

}  // namespace semiflow
