#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "cp2d/common.hpp"
#include "cp2d/tokenizer.hpp"

namespace cp2d {

inline constexpr double k_neg_inf = -std::numeric_limits<double>::infinity();

/// Discount alpha in (0,1) and concentration theta > -alpha.
struct AuthorParams {
    double alpha = 0.5;
    double theta = 1.0;

    void validate() const;
    friend bool operator==(const AuthorParams&, const AuthorParams&) = default;
};

enum class BaseStrategy { global, author_excluded };

BaseStrategy parse_base_strategy(std::string_view name);
std::string_view to_string(BaseStrategy strategy);

/// Prior over token identities for novel draws, indexed by type id. The
/// log-probability table is shared between the global base and its
/// author-excluded derivatives.
struct BaseDistribution {
    BaseStrategy strategy = BaseStrategy::global;
    std::shared_ptr<const std::vector<double>> logp0;
    // Raw frequencies when the base was built from counts; lets the
    // author-excluded normalizer be computed in exact integer arithmetic.
    std::shared_ptr<const std::vector<std::uint64_t>> counts;
    std::uint64_t total = 0;
    double delta = 1.0;
    double log_normalizer = 0.0;  // log 1/P(A^C) for an author-excluded base

    double log_p0(TypeId id) const {
        return id < logp0->size() ? (*logp0)[id] : k_neg_inf;
    }
    /// Log prior of a novel draw, including the exclusion normalizer but not delta.
    double log_new(TypeId id) const { return log_p0(id) + log_normalizer; }
    std::size_t vocabulary_size() const { return logp0 ? logp0->size() : 0; }
};

/// Fitted per-author state; counts come from the concatenation of the
/// author's training texts.
struct AuthorProfile {
    std::string author_id;
    AuthorParams params;
    CountTable counts;
    double base_normalizer = 0.0;     // log 1/P(A^C) under the bound base
    bool normalizer_fallback = false; // author covers the whole base support

    std::uint64_t m() const { return counts.total(); }
    std::size_t distinct() const { return counts.distinct(); }
};

/// Running (counts, t, D_t) of a sequence for step-by-step evaluation.
class PdState {
public:
    PdState() = default;
    explicit PdState(const CountTable& counts);

    void push(TypeId id);
    std::uint64_t count_of(TypeId id) const;
    std::uint64_t t() const { return t_; }
    std::uint64_t distinct() const { return counts_.size(); }
    const std::unordered_map<TypeId, std::uint64_t>& counts() const { return counts_; }

private:
    std::unordered_map<TypeId, std::uint64_t> counts_;
    std::uint64_t t_ = 0;
};

/// log((θ + αD_t)/(θ + t)): total probability that the next draw is new.
double pd_log_new_mass(const AuthorParams& params, const PdState& state);

/// Log-probability that the next draw is `token`.
double pd_step(const AuthorParams& params, const PdState& state, TypeId token,
               const BaseDistribution& base);

struct SequenceLogProb {
    double partition = 0.0;  // α,θ-dependent part, independent of the base
    double base_terms = 0.0; // Σ_j log P0(y_j)
    double total() const { return partition + base_terms; }
};

/// Joint log-probability of a sequence with the given counts.
SequenceLogProb sequence_log_prob(const AuthorParams& params, const CountTable& counts,
                                  const BaseDistribution& base);

/// Base-independent partition log-likelihood from the multiplicity spectrum.
/// Evaluated as log (θ+α|α)_{k-1} - log (θ+1)_{n-1} + Σ_i r_i log (1-α)_{i-1},
/// which equals the (θ|α)_k / (θ)_n form for θ > 0 and stays finite on (-α, 0].
double partition_log_likelihood(const AuthorParams& params, const MultiplicitySpectrum& spectrum);

struct TextScore {
    double log_prob = 0.0;
    std::uint64_t new_types = 0;  // D_{T∪A} - D_A
};

/// Log-probability that `text` continues the author's production, with its
/// new-type count. Types are summed in ascending id order.
TextScore score_text(const AuthorProfile& profile, const CountTable& text,
                     const BaseDistribution& base);

inline double log_prob_text_given_author(const AuthorProfile& profile, const CountTable& text,
                                         const BaseDistribution& base) {
    return score_text(profile, text, base).log_prob;
}

/// Rescale a δ = 1 log-probability to another δ.
double apply_delta(double logp_at_delta1, std::uint64_t new_types, double delta);

/// Frequencies over the whole vocabulary; types with zero count get log 0.
BaseDistribution base_global(std::vector<std::uint64_t> counts);
BaseDistribution base_global(const CountTable& counts, std::size_t vocabulary_size);

/// Base from explicit probabilities (must sum to 1 within 1e-9).
BaseDistribution base_from_probabilities(const std::vector<double>& p0);

/// P0 renormalized over the types absent from the author. `fallback` is set
/// (and the global base returned) when the author covers all base mass.
BaseDistribution base_author_excluded(const BaseDistribution& global, const AuthorProfile& profile,
                                      bool* fallback = nullptr);

/// Compute and cache the author-excluded normalizer in the profile.
void bind_base(AuthorProfile& profile, const BaseDistribution& global);

/// Base for `profile` under `strategy`, using its cached normalizer.
BaseDistribution base_for(const BaseDistribution& global, const AuthorProfile& profile,
                          BaseStrategy strategy);

/// History-dependent base: P0 renormalized at each step over unseen types.
class HistoryBase {
public:
    explicit HistoryBase(const BaseDistribution& global);

    /// log P0^t(y); -inf for seen types.
    double log_prob(TypeId id) const;
    void mark_seen(TypeId id);
    double seen_mass() const { return seen_mass_; }

private:
    BaseDistribution global_;
    std::vector<bool> seen_;
    double seen_mass_ = 0.0;
    std::uint64_t seen_count_ = 0;
};

}  // namespace cp2d
