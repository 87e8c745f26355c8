#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "cp2d/common.hpp"
#include "cp2d/corpus.hpp"
#include "cp2d/pdmodel.hpp"

namespace cp2d {

/// Urn model with triggering: reinforcement rho, novelty reinforcement
/// rho_tilde, nu + 1 new colours per novelty, N0 initial colours.
struct UrnParams {
    double rho = 1.0;
    double rho_tilde = 1.0;
    std::uint64_t nu = 1;
    double n0 = 1.0;

    /// a = rho_tilde - rho + nu + 1
    double a() const { return rho_tilde - rho + static_cast<double>(nu) + 1.0; }
    void validate() const;
};

/// UMT parameters whose step law is the PD process with α = ν/ρ, θ = N0/ρ.
UrnParams exchangeable_urn(double rho, std::uint64_t nu, double n0);

/// α = ν/ρ, θ = N0/ρ. nu = 0 gives α = 0 (Dirichlet limit), returned as-is
/// without AuthorParams validation.
AuthorParams exchangeable_params(double rho, std::uint64_t nu, double n0);

struct GeneratedSequence {
    std::vector<TypeId> sequence;
    std::vector<std::uint64_t> distinct_trace;  // D_t after step t (index t-1)
    std::uint64_t t_max = 0;
    std::uint64_t seed = 0;
};

struct UrnStepProbs {
    double p_new = 0.0;                // b_t
    std::vector<double> p_old;         // q_{c,t}, parallel to the colour ids in the state
};

/// Step probabilities for the given colour counts (colour ids 0..D-1).
UrnStepProbs umt_step_probs(const UrnParams& params, const std::vector<std::uint64_t>& counts);

/// Step probabilities of the PD process for the same history layout.
UrnStepProbs pd_step_probs(const AuthorParams& params, const std::vector<std::uint64_t>& counts);

GeneratedSequence simulate_umt(const UrnParams& params, std::uint64_t t_max, std::uint64_t seed);

/// Supplies the identity of each novel draw. Called with the number of
/// distinct types so far; must never return a previously returned id.
using BaseSampler = std::function<TypeId(std::uint64_t distinct_so_far, Rng& rng)>;

/// Fresh ids in order: 0, 1, 2, ...
BaseSampler sequential_ids();

GeneratedSequence simulate_pd(const AuthorParams& params, std::uint64_t t_max, std::uint64_t seed,
                              const BaseSampler& base = sequential_ids());

/// Least-squares slope of log D_t against log t over the final two decades.
double heaps_exponent(const std::vector<std::uint64_t>& distinct_trace);

/// CSV `t,D_t`, one row per step (or every `stride` steps).
void write_trace_csv(std::ostream& out, const GeneratedSequence& seq, std::uint64_t stride = 1);

struct SynthAuthorSpec {
    double alpha_min = 0.3, alpha_max = 0.7;
    double theta_min = 5.0, theta_max = 50.0;
};

struct SynthOptions {
    std::size_t n_authors = 10;
    std::size_t docs_per_author = 20;
    std::size_t tokens_per_doc = 2000;
    std::size_t vocabulary_per_author = 20000;
    double shared_fraction = 0.5;  // share of each author's vocabulary drawn from a common core
    double zipf_exponent = 1.0;
    SynthAuthorSpec params;
    std::uint64_t seed = 1;
};

struct SynthCorpus {
    Corpus corpus;
    std::map<std::string, AuthorParams> truth;
};

/// Each author draws (α, θ) uniformly from the given ranges and a Zipfian base
/// over its own vocabulary (a shared core plus private types, ranks shuffled
/// per author). One PD sequence per author is generated and cut into
/// consecutive documents; words are lowercase letter strings joined by spaces.
SynthCorpus synth_corpus(const SynthOptions& options);

/// jsonl rows {author, id, text} in corpus order.
void write_corpus_jsonl(std::ostream& out, const Corpus& corpus);

}  // namespace cp2d
