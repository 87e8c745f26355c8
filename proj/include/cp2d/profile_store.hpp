#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cp2d/corpus.hpp"
#include "cp2d/estimator.hpp"
#include "cp2d/pdmodel.hpp"
#include "cp2d/tokenizer.hpp"

namespace cp2d {

/// Everything needed to score new documents against fitted authors.
///
/// JSON layout (format "cp2d-profiles", version 1):
///   tokenizer   token specification string, e.g. "osf:5"
///   encoding    "latin1" | "latin2"
///   seed        seed recorded by the producing run
///   vocabulary  token strings by type id, code page bytes mapped to UTF-8
///   base_counts [[type id, count], ...] over the training corpus
///   profiles    [{author, alpha, theta, normalizer, counts: [[id, n], ...],
///                 fit: {converged, iterations, resets_used, gradient_norm}}]
struct ProfileStore {
    static constexpr int k_version = 1;

    TokenizerSpec tokenizer;
    Encoding encoding = Encoding::latin1;
    std::uint64_t seed = 0;
    Vocabulary vocab;
    CountTable base_counts;
    std::vector<AuthorProfile> profiles;
    std::vector<FitReport> fits;  // parallel to profiles; may be empty

    std::vector<std::string> author_ids() const;
};

nlohmann::json to_json(const ProfileStore& store);
ProfileStore profile_store_from_json(const nlohmann::json& root);

void save_profile_store(const ProfileStore& store, const std::filesystem::path& path);
ProfileStore load_profile_store(const std::filesystem::path& path);

}  // namespace cp2d
