#include <doctest.h>

#include <cmath>

#include "cp2d/common.hpp"
#include "cp2d/special.hpp"
#include "support.hpp"

using namespace cp2d;

namespace {
constexpr double k_euler_gamma = 0.57721566490153286;

long double naive_log_pochhammer(long double z, std::uint64_t n) {
    long double s = 0;
    for (std::uint64_t i = 0; i < n; ++i) s += std::log(z + static_cast<long double>(i));
    return s;
}
}  // namespace

TEST_CASE("log_pochhammer small products") {
    CHECK(log_pochhammer(2.0, 3) == doctest::Approx(std::log(24.0)).epsilon(1e-15));
    CHECK(log_pochhammer(3.7, 0) == 0.0);
    CHECK(log_pochhammer(0.5, 2) == doctest::Approx(std::log(0.75)).epsilon(1e-15));
    CHECK_THROWS_AS(log_pochhammer(0.0, 2), DomainError);
    CHECK_THROWS_AS(log_pochhammer(-1.0, 2), DomainError);
}

TEST_CASE("log_pochhammer agrees with the naive sum on both evaluation paths") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const double z = testing::uniform_in(rng, 1e-3, 500.0);
        const std::uint64_t n = rng.below(400);
        const double expected = static_cast<double>(naive_log_pochhammer(z, n));
        CHECK(log_pochhammer(z, n) == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("log_pochhammer_inc") {
    CHECK(log_pochhammer_inc(1.0, 2.0, 3) == doctest::Approx(std::log(15.0)).epsilon(1e-15));
    CHECK(log_pochhammer_inc(2.5, 0.3, 0) == 0.0);
    for (double z : {0.1, 1.0, 7.5})
        for (std::uint64_t n : {1u, 5u, 60u})
            CHECK(log_pochhammer_inc(z, 1.0, n) == doctest::Approx(log_pochhammer(z, n)).epsilon(1e-14));
    // Increment form against the direct product z (z+k) ... (z+(n-1)k).
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const double z = testing::uniform_in(rng, 0.01, 50.0);
        const double k = testing::uniform_in(rng, 0.01, 0.99);
        const std::uint64_t n = rng.below(100);
        long double direct = 0;
        for (std::uint64_t i = 0; i < n; ++i) direct += std::log(z + static_cast<long double>(i) * k);
        CHECK(log_pochhammer_inc(z, k, n) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("digamma identities") {
    CHECK(digamma(1.0) == doctest::Approx(-k_euler_gamma).epsilon(1e-14));
    CHECK(digamma(2.0) == doctest::Approx(1.0 - k_euler_gamma).epsilon(1e-14));
    CHECK(digamma(0.5) == doctest::Approx(-k_euler_gamma - 2.0 * std::log(2.0)).epsilon(1e-13));
    // Reference values from an arbitrary-precision library.
    CHECK(digamma(1e-3) == doctest::Approx(-1000.5755719318103).epsilon(1e-14));
    CHECK(digamma(7.25) == doctest::Approx(1.910453526883736).epsilon(1e-14));
    CHECK(digamma(1e6) == doctest::Approx(13.81551005796419).epsilon(1e-14));
    CHECK_THROWS_AS(digamma(0.0), DomainError);
}

TEST_CASE("digamma satisfies the recurrence and differentiates log_gamma") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const double x = testing::uniform_in(rng, 0.05, 200.0);
        CHECK(digamma(x + 1.0) == doctest::Approx(digamma(x) + 1.0 / x).epsilon(1e-13).scale(1.0));
        const double h = 1e-5 * std::max(1.0, x);
        const double fd = (log_gamma(x + h) - log_gamma(x - h)) / (2 * h);
        CHECK(digamma(x) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("trigamma reference values and recurrence") {
    CHECK(trigamma(1e-3) == doctest::Approx(1000001.6425331958).epsilon(1e-12));
    CHECK(trigamma(0.3) == doctest::Approx(12.245364546107732).epsilon(1e-12));
    CHECK(trigamma(1.0) == doctest::Approx(1.6449340668482264).epsilon(1e-12));
    CHECK(trigamma(5.5) == doctest::Approx(0.19934238698962767).epsilon(1e-12));
    CHECK(trigamma(7.0) == doctest::Approx(0.15354517795933756).epsilon(1e-12));
    CHECK(trigamma(100.0) == doctest::Approx(0.010050166663333571).epsilon(1e-12));
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const double x = testing::uniform_in(rng, 0.05, 100.0);
        CHECK(trigamma(x) == doctest::Approx(trigamma(x + 1.0) + 1.0 / (x * x)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(trigamma(-2.0), DomainError);
}
