#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cp2d {

using TypeId = std::uint32_t;

// Error categories map onto distinct CLI exit codes.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Platform-independent random source: mt19937_64 outputs are specified by the
/// standard, but the std distributions are not, so draws go through these helpers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform real in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform real in (0, 1).
    double uniform_open();

private:
    std::mt19937_64 engine_;
};

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(items[i - 1], items[j]);
    }
}

/// Derive an independent stream seed from a base seed and a stream index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Number of workers to use when the caller asks for 0 ("auto").
unsigned resolve_workers(unsigned requested);

/// Run body(i) for i in [0, count) on up to `workers` threads. Results must be
/// written to caller-owned slots indexed by i so the outcome never depends on
/// scheduling. The first exception thrown by any body is rethrown.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace cp2d
