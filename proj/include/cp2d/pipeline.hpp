#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cp2d/attribution.hpp"
#include "cp2d/corpus.hpp"
#include "cp2d/estimator.hpp"
#include "cp2d/pdmodel.hpp"
#include "cp2d/profile_store.hpp"
#include "cp2d/tokenizer.hpp"

namespace cp2d {

/// One point of the hyperparameter space.
struct HyperConfig {
    TokenizerSpec tokenizer = TokenizerSpec::osf(5);
    BaseStrategy p0 = BaseStrategy::global;
    FragmentLength fragment = FragmentLength::full();
    Criterion criterion = Criterion::ml;
    double delta = 1.0;

    friend bool operator==(const HyperConfig&, const HyperConfig&) = default;
};

nlohmann::json to_json(const HyperConfig& config);
HyperConfig hyper_config_from_json(const nlohmann::json& row);

/// Summed counts of the given documents.
CountTable pooled_counts(const TokenizedCorpus& tokenized, const std::vector<std::size_t>& indices);

/// Global frequency base over the given documents, sized to the full vocabulary.
BaseDistribution base_from_documents(const TokenizedCorpus& tokenized, const std::vector<std::size_t>& indices);

/// Fitted profiles sorted by author id, with their optimizer reports.
struct FittedAuthors {
    std::vector<AuthorProfile> profiles;
    std::vector<FitReport> reports;

    std::vector<std::string> author_ids() const;
};

/// Fit one profile per author present among `train`.
FittedAuthors fit_profiles(const Corpus& corpus, const TokenizedCorpus& tokenized,
                           const std::vector<std::size_t>& train, const OptimizerSettings& settings = {},
                           unsigned workers = 1);

/// Cache each profile's author-excluded normalizer under `base`.
void bind_all(std::vector<AuthorProfile>& profiles, const BaseDistribution& base);

/// Attribute one token stream against the profiles. `base` must be global
/// with delta 1; the config selects strategy, delta, fragments and criterion.
AttributionResult attribute_stream(const std::string& document_id, const TokenStream& stream,
                                   const std::vector<AuthorProfile>& profiles, const BaseDistribution& base,
                                   const HyperConfig& config, unsigned workers = 1);

/// Fit on `train`, build the base over train and the attributed documents,
/// and attribute each of `targets`.
std::vector<AttributionResult> attribute_documents(const Corpus& corpus, const TokenizedCorpus& tokenized,
                                                   const std::vector<std::size_t>& train,
                                                   const std::vector<std::size_t>& targets,
                                                   const HyperConfig& config,
                                                   const OptimizerSettings& settings = {},
                                                   unsigned workers = 1);

/// Profiles plus base counts over `train`, ready to be saved.
ProfileStore build_profile_store(const Corpus& corpus, const TokenizedCorpus& tokenized,
                                 const std::vector<std::size_t>& train, std::uint64_t seed,
                                 const OptimizerSettings& settings = {}, unsigned workers = 1);

}  // namespace cp2d
