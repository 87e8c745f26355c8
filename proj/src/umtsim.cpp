#include "cp2d/umtsim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

namespace cp2d {

void UrnParams::validate() const {
    if (!(rho > 0.0)) throw DomainError("urn: rho must be positive");
    if (!(rho_tilde >= 0.0)) throw DomainError("urn: rho_tilde must be non-negative");
    if (!(n0 > 0.0)) throw DomainError("urn: N0 must be positive");
    // q_{c,t} numerator is smallest for a colour seen once: rho + a - nu.
    if (rho + a() - static_cast<double>(nu) < 0.0)
        throw DomainError("urn: parameters give negative probabilities for old colours");
}

UrnParams exchangeable_urn(double rho, std::uint64_t nu, double n0) {
    UrnParams p;
    p.rho = rho;
    p.nu = nu;
    p.n0 = n0;
    p.rho_tilde = rho - static_cast<double>(nu + 1);
    return p;
}

AuthorParams exchangeable_params(double rho, std::uint64_t nu, double n0) {
    if (!(rho > 0.0) || !(n0 > 0.0)) throw DomainError("exchangeable_params: rho and N0 must be positive");
    if (static_cast<double>(nu) >= rho) throw DomainError("exchangeable_params: need nu < rho");
    return {static_cast<double>(nu) / rho, n0 / rho};
}

UrnStepProbs umt_step_probs(const UrnParams& params, const std::vector<std::uint64_t>& counts) {
    std::uint64_t t = 0;
    for (const auto c : counts) t += c;
    const double d = static_cast<double>(counts.size());
    const double a = params.a();
    const double denom = params.n0 + params.rho * static_cast<double>(t) + a * d;
    UrnStepProbs out;
    out.p_new = (params.n0 + static_cast<double>(params.nu) * d) / denom;
    out.p_old.reserve(counts.size());
    for (const auto c : counts)
        out.p_old.push_back((params.rho * static_cast<double>(c) + a - static_cast<double>(params.nu)) / denom);
    return out;
}

UrnStepProbs pd_step_probs(const AuthorParams& params, const std::vector<std::uint64_t>& counts) {
    std::uint64_t t = 0;
    for (const auto c : counts) t += c;
    const double d = static_cast<double>(counts.size());
    const double denom = params.theta + static_cast<double>(t);
    UrnStepProbs out;
    out.p_new = (params.theta + params.alpha * d) / denom;
    out.p_old.reserve(counts.size());
    for (const auto c : counts) out.p_old.push_back((static_cast<double>(c) - params.alpha) / denom);
    return out;
}

namespace {

// Shared sampler core: an old colour c is drawn with weight slope * n_c + offset.
// Proposals pick a uniformly random past draw (weight ∝ n_c); a negative offset
// is handled by rejection, a positive one by mixing in a uniform colour choice.
struct Sampler {
    std::vector<std::uint32_t> history;  // local colour index of each draw
    std::vector<std::uint64_t> counts;   // per local colour

    std::uint32_t draw_old(double slope, double offset, Rng& rng) const {
        const double t = static_cast<double>(history.size());
        const double d = static_cast<double>(counts.size());
        if (offset >= 0.0) {
            const double token_mass = slope * t;
            if (rng.uniform() * (token_mass + offset * d) >= token_mass)
                return static_cast<std::uint32_t>(rng.below(counts.size()));
            return history[rng.below(history.size())];
        }
        for (;;) {
            const std::uint32_t c = history[rng.below(history.size())];
            const double n = static_cast<double>(counts[c]);
            if (rng.uniform() * slope * n < slope * n + offset) return c;
        }
    }

    void record(std::uint32_t colour) {
        if (colour == counts.size()) counts.push_back(0);
        ++counts[colour];
        history.push_back(colour);
    }
};

}  // namespace

GeneratedSequence simulate_umt(const UrnParams& params, std::uint64_t t_max, std::uint64_t seed) {
    params.validate();
    if (t_max < 1) throw ConfigError("simulate_umt: t_max must be at least 1");
    Rng rng(seed);
    Sampler sampler;
    GeneratedSequence out;
    out.t_max = t_max;
    out.seed = seed;
    out.sequence.reserve(t_max);
    out.distinct_trace.reserve(t_max);
    const double a = params.a();
    const double offset = a - static_cast<double>(params.nu);
    for (std::uint64_t t = 0; t < t_max; ++t) {
        const double d = static_cast<double>(sampler.counts.size());
        const double denom = params.n0 + params.rho * static_cast<double>(t) + a * d;
        const double p_new = (params.n0 + static_cast<double>(params.nu) * d) / denom;
        std::uint32_t colour;
        if (t == 0 || rng.uniform() < p_new) colour = static_cast<std::uint32_t>(sampler.counts.size());
        else colour = sampler.draw_old(params.rho, offset, rng);
        sampler.record(colour);
        out.sequence.push_back(colour);
        out.distinct_trace.push_back(sampler.counts.size());
    }
    return out;
}

BaseSampler sequential_ids() {
    return [](std::uint64_t distinct_so_far, Rng&) { return static_cast<TypeId>(distinct_so_far); };
}

GeneratedSequence simulate_pd(const AuthorParams& params, std::uint64_t t_max, std::uint64_t seed,
                              const BaseSampler& base) {
    params.validate();
    if (t_max < 1) throw ConfigError("simulate_pd: t_max must be at least 1");
    Rng rng(seed);
    Sampler sampler;
    std::vector<TypeId> ids;  // local colour -> type id
    GeneratedSequence out;
    out.t_max = t_max;
    out.seed = seed;
    out.sequence.reserve(t_max);
    out.distinct_trace.reserve(t_max);
    for (std::uint64_t t = 0; t < t_max; ++t) {
        const double d = static_cast<double>(sampler.counts.size());
        const double p_new = (params.theta + params.alpha * d) / (params.theta + static_cast<double>(t));
        std::uint32_t colour;
        if (t == 0 || rng.uniform() < p_new) {
            colour = static_cast<std::uint32_t>(sampler.counts.size());
            ids.push_back(base(sampler.counts.size(), rng));
        } else {
            colour = sampler.draw_old(1.0, -params.alpha, rng);
        }
        sampler.record(colour);
        out.sequence.push_back(ids[colour]);
        out.distinct_trace.push_back(sampler.counts.size());
    }
    return out;
}

double heaps_exponent(const std::vector<std::uint64_t>& distinct_trace) {
    const std::size_t total = distinct_trace.size();
    if (total < 10000) throw DataError("heaps_exponent: trace must contain at least 10^4 steps");
    const double log_hi = std::log(static_cast<double>(total));
    const double log_lo = log_hi - 2.0 * std::log(10.0);
    constexpr int k_points = 200;
    std::vector<double> xs, ys;
    std::size_t last_t = 0;
    for (int i = 0; i < k_points; ++i) {
        const double lt = log_lo + (log_hi - log_lo) * i / (k_points - 1);
        const auto t = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(std::exp(lt))), 1, total);
        if (t == last_t) continue;
        last_t = t;
        xs.push_back(std::log(static_cast<double>(t)));
        ys.push_back(std::log(static_cast<double>(std::max<std::uint64_t>(distinct_trace[t - 1], 1))));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

void write_trace_csv(std::ostream& out, const GeneratedSequence& seq, std::uint64_t stride) {
    if (stride == 0) stride = 1;
    out << "t,D_t\n";
    for (std::size_t i = 0; i < seq.distinct_trace.size(); ++i) {
        const std::uint64_t t = i + 1;
        if (t % stride == 0 || t == seq.distinct_trace.size()) out << t << ',' << seq.distinct_trace[i] << '\n';
    }
}

namespace {

// Bijective base-26 over 'a'..'z': 0 -> "a", 25 -> "z", 26 -> "aa".
std::string letter_name(std::uint64_t id) {
    std::string out;
    ++id;
    while (id > 0) {
        --id;
        out.push_back(static_cast<char>('a' + id % 26));
        id /= 26;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

// Draw order of a weighted sampling without replacement (Efraimidis-Spirakis keys).
std::vector<TypeId> weighted_permutation(const std::vector<TypeId>& ids,
                                         const std::vector<double>& weights, Rng& rng) {
    std::vector<std::pair<double, TypeId>> keyed(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
        keyed[i] = {std::log(rng.uniform_open()) / weights[i], ids[i]};
    std::sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) {
        return x.first > y.first || (x.first == y.first && x.second < y.second);
    });
    std::vector<TypeId> out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out[i] = keyed[i].second;
    return out;
}

}  // namespace

SynthCorpus synth_corpus(const SynthOptions& options) {
    if (options.n_authors < 2) throw ConfigError("synth_corpus: need at least 2 authors");
    if (options.docs_per_author < 2) throw ConfigError("synth_corpus: need at least 2 documents per author");
    if (options.tokens_per_doc < 1 || options.vocabulary_per_author < 1)
        throw ConfigError("synth_corpus: tokens and vocabulary must be positive");
    if (options.shared_fraction < 0.0 || options.shared_fraction > 1.0)
        throw ConfigError("synth_corpus: shared fraction must lie in [0,1]");

    Rng rng(options.seed);
    const auto vocab = static_cast<std::uint64_t>(options.vocabulary_per_author);
    const auto shared = static_cast<std::uint64_t>(std::llround(options.shared_fraction * static_cast<double>(vocab)));
    const std::uint64_t priv = vocab - shared;
    const std::uint64_t overflow_base = shared + priv * options.n_authors;
    const std::uint64_t length = options.docs_per_author * options.tokens_per_doc;

    SynthCorpus out;
    std::vector<Document> docs;
    for (std::size_t a = 0; a < options.n_authors; ++a) {
        char name[16];
        std::snprintf(name, sizeof name, "a%02zu", a);
        const std::string author = name;

        AuthorParams params;
        params.alpha = options.params.alpha_min +
                       (options.params.alpha_max - options.params.alpha_min) * rng.uniform();
        params.theta = options.params.theta_min +
                       (options.params.theta_max - options.params.theta_min) * rng.uniform();
        out.truth[author] = params;

        std::vector<TypeId> ids;
        ids.reserve(vocab);
        for (std::uint64_t j = 0; j < shared; ++j) ids.push_back(static_cast<TypeId>(j));
        for (std::uint64_t j = 0; j < priv; ++j) ids.push_back(static_cast<TypeId>(shared + a * priv + j));
        shuffle(ids, rng);
        std::vector<double> weights(ids.size());
        for (std::size_t r = 0; r < ids.size(); ++r)
            weights[r] = std::pow(static_cast<double>(r + 1), -options.zipf_exponent);
        const auto order = weighted_permutation(ids, weights, rng);

        const std::uint64_t author_seed = derive_seed(options.seed, a);
        BaseSampler base = [&, a](std::uint64_t distinct, Rng&) -> TypeId {
            if (distinct < order.size()) return order[distinct];
            return static_cast<TypeId>(overflow_base + a * length + (distinct - order.size()));
        };
        const auto seq = simulate_pd(params, length, author_seed, base);

        for (std::size_t d = 0; d < options.docs_per_author; ++d) {
            std::string text;
            for (std::size_t i = 0; i < options.tokens_per_doc; ++i) {
                if (i) text.push_back(' ');
                text += letter_name(seq.sequence[d * options.tokens_per_doc + i]);
            }
            char doc_name[32];
            std::snprintf(doc_name, sizeof doc_name, "%s/d%03zu", author.c_str(), d);
            Document doc;
            doc.id = doc_name;
            doc.author_id = author;
            doc.char_count = text.size();
            doc.bytes = std::move(text);
            docs.push_back(std::move(doc));
        }
    }
    out.corpus = make_corpus(std::move(docs), Encoding::latin1).corpus;
    return out;
}

void write_corpus_jsonl(std::ostream& out, const Corpus& corpus) {
    for (const auto& doc : corpus.documents) {
        nlohmann::json row = {{"author", doc.author_id},
                              {"id", doc.id},
                              {"text", to_utf8(doc.bytes, corpus.encoding)}};
        out << row.dump() << '\n';
    }
}

}  // namespace cp2d
