#pragma once

#include <cstdint>

namespace cp2d {

/// log Γ(x) for x > 0, reentrant.
double log_gamma(double x);

/// log (z)_n = log z(z+1)...(z+n-1). Requires z > 0.
double log_pochhammer(double z, std::uint64_t n);

/// log (z|k)_n = log z(z+k)...(z+(n-1)k), evaluated as n log k + log (z/k)_n.
/// Requires z > 0 and k > 0.
double log_pochhammer_inc(double z, double k, std::uint64_t n);

/// ψ(x) for x > 0: upward recurrence to x >= 10, then the asymptotic series.
double digamma(double x);

/// ψ'(x) for x > 0, same scheme as digamma.
double trigamma(double x);

}  // namespace cp2d
