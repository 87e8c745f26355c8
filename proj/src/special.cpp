#include "cp2d/special.hpp"

#include <cmath>
#include <string>

#include "cp2d/common.hpp"

namespace cp2d {

namespace {
// Below this length the product is summed directly: it is exact to rounding and
// avoids cancellation between two large log-gamma values.
constexpr std::uint64_t k_direct_sum_limit = 32;
}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive, got " + std::to_string(x));
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

double log_pochhammer(double z, std::uint64_t n) {
    if (!(z > 0.0)) throw DomainError("log_pochhammer: z must be positive, got " + std::to_string(z));
    if (n == 0) return 0.0;
    if (n <= k_direct_sum_limit) {
        double sum = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) sum += std::log(z + static_cast<double>(i));
        return sum;
    }
    return log_gamma(z + static_cast<double>(n)) - log_gamma(z);
}

double log_pochhammer_inc(double z, double k, std::uint64_t n) {
    if (!(z > 0.0)) throw DomainError("log_pochhammer_inc: z must be positive, got " + std::to_string(z));
    if (!(k > 0.0)) throw DomainError("log_pochhammer_inc: increment must be positive");
    if (n == 0) return 0.0;
    return static_cast<double>(n) * std::log(k) + log_pochhammer(z / k, n);
}

double digamma(double x) {
    if (!(x > 0.0)) throw DomainError("digamma: argument must be positive, got " + std::to_string(x));
    double shift = 0.0;
    while (x < 10.0) {
        shift -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // -sum B_2k / (2k x^2k), k = 1..7
    const double series =
        inv2 * (1.0 / 12 -
        inv2 * (1.0 / 120 -
        inv2 * (1.0 / 252 -
        inv2 * (1.0 / 240 -
        inv2 * (1.0 / 132 -
        inv2 * (691.0 / 32760 -
        inv2 * (1.0 / 12)))))));
    return shift + std::log(x) - 0.5 * inv - series;
}

double trigamma(double x) {
    if (!(x > 0.0)) throw DomainError("trigamma: argument must be positive, got " + std::to_string(x));
    double shift = 0.0;
    while (x < 10.0) {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    // 1/x + 1/(2x^2) + sum B_2k / x^(2k+1), k = 1..7
    const double series =
        inv2 * inv * (1.0 / 6 -
        inv2 * (1.0 / 30 -
        inv2 * (1.0 / 42 -
        inv2 * (1.0 / 30 -
        inv2 * (5.0 / 66 -
        inv2 * (691.0 / 2730 -
        inv2 * (7.0 / 6)))))));
    return shift + inv + 0.5 * inv2 + series;
}

}  // namespace cp2d
