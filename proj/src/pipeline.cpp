#include "cp2d/pipeline.hpp"

namespace cp2d {

nlohmann::json to_json(const HyperConfig& config) {
    return {{"tokenizer", config.tokenizer.to_string()},
            {"p0", std::string(to_string(config.p0))},
            {"fragment", config.fragment.to_string()},
            {"criterion", std::string(to_string(config.criterion))},
            {"delta", config.delta}};
}

HyperConfig hyper_config_from_json(const nlohmann::json& row) {
    try {
        HyperConfig config;
        config.tokenizer = TokenizerSpec::parse(row.at("tokenizer").get<std::string>());
        config.p0 = parse_base_strategy(row.at("p0").get<std::string>());
        const auto& fragment = row.at("fragment");
        config.fragment = fragment.is_number() ? FragmentLength::of(fragment.get<std::size_t>())
                                               : FragmentLength::parse(fragment.get<std::string>());
        config.criterion = parse_criterion(row.at("criterion").get<std::string>());
        config.delta = row.at("delta").get<double>();
        if (!(config.delta > 0.0)) throw ConfigError("delta must be positive");
        return config;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("hyperparameter config: ") + e.what());
    }
}

CountTable pooled_counts(const TokenizedCorpus& tokenized, const std::vector<std::size_t>& indices) {
    CountTable out;
    for (const auto i : indices) out.merge(tokenized.streams.at(i).counts);
    return out;
}

BaseDistribution base_from_documents(const TokenizedCorpus& tokenized, const std::vector<std::size_t>& indices) {
    return base_global(pooled_counts(tokenized, indices), tokenized.vocab.size());
}

std::vector<std::string> FittedAuthors::author_ids() const {
    std::vector<std::string> ids;
    ids.reserve(profiles.size());
    for (const auto& p : profiles) ids.push_back(p.author_id);
    return ids;
}

FittedAuthors fit_profiles(const Corpus& corpus, const TokenizedCorpus& tokenized,
                           const std::vector<std::size_t>& train, const OptimizerSettings& settings,
                           unsigned workers) {
    std::map<std::string, std::vector<std::size_t>> by_author;
    for (const auto i : train) by_author[corpus.documents.at(i).author_id].push_back(i);
    std::vector<std::pair<std::string, std::vector<std::size_t>>> groups(by_author.begin(), by_author.end());

    FittedAuthors out;
    out.profiles.resize(groups.size());
    out.reports.resize(groups.size());
    parallel_for(groups.size(), workers, [&](std::size_t g) {
        auto& profile = out.profiles[g];
        profile.author_id = groups[g].first;
        profile.counts = pooled_counts(tokenized, groups[g].second);
        if (profile.counts.total() == 0) throw DataError("author '" + profile.author_id + "' has no tokens");
        out.reports[g] = fit_author(profile.counts, settings);
        profile.params = out.reports[g].params;
    });
    return out;
}

void bind_all(std::vector<AuthorProfile>& profiles, const BaseDistribution& base) {
    for (auto& p : profiles) bind_base(p, base);
}

AttributionResult attribute_stream(const std::string& document_id, const TokenStream& stream,
                                   const std::vector<AuthorProfile>& profiles, const BaseDistribution& base,
                                   const HyperConfig& config, unsigned workers) {
    if (profiles.empty()) throw DataError("no author profiles to attribute against");
    std::vector<std::string> ids;
    ids.reserve(profiles.size());
    for (const auto& p : profiles) ids.push_back(p.author_id);
    if (stream.sequence.empty()) {
        // Nothing to score: every author gets log 1 and the smallest id wins.
        return attribute(document_id, ScoreGrid::from_rows({std::vector<double>(ids.size(), 0.0)}), ids,
                         config.criterion);
    }
    BaseDistribution scoring = base;
    scoring.strategy = config.p0;
    scoring.delta = config.delta;
    const auto fragments = fragment(stream, config.fragment, document_id);
    const auto grid = score_grid(fragments, profiles, scoring, workers);
    return attribute(document_id, grid, ids, config.criterion);
}

std::vector<AttributionResult> attribute_documents(const Corpus& corpus, const TokenizedCorpus& tokenized,
                                                   const std::vector<std::size_t>& train,
                                                   const std::vector<std::size_t>& targets,
                                                   const HyperConfig& config,
                                                   const OptimizerSettings& settings, unsigned workers) {
    auto fitted = fit_profiles(corpus, tokenized, train, settings, workers);
    std::vector<std::size_t> seen = train;
    seen.insert(seen.end(), targets.begin(), targets.end());
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    const auto base = base_from_documents(tokenized, seen);
    bind_all(fitted.profiles, base);

    std::vector<AttributionResult> results(targets.size());
    parallel_for(targets.size(), workers, [&](std::size_t t) {
        const auto i = targets[t];
        results[t] = attribute_stream(corpus.documents[i].id, tokenized.streams[i], fitted.profiles, base, config);
    });
    return results;
}

ProfileStore build_profile_store(const Corpus& corpus, const TokenizedCorpus& tokenized,
                                 const std::vector<std::size_t>& train, std::uint64_t seed,
                                 const OptimizerSettings& settings, unsigned workers) {
    ProfileStore store;
    store.tokenizer = tokenized.spec;
    store.encoding = corpus.encoding;
    store.seed = seed;
    store.vocab = tokenized.vocab;
    store.base_counts = pooled_counts(tokenized, train);
    auto fitted = fit_profiles(corpus, tokenized, train, settings, workers);
    bind_all(fitted.profiles, base_global(store.base_counts, store.vocab.size()));
    store.profiles = std::move(fitted.profiles);
    store.fits = std::move(fitted.reports);
    return store;
}

}  // namespace cp2d
