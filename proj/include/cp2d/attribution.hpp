#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cp2d/pdmodel.hpp"
#include "cp2d/tokenizer.hpp"

namespace cp2d {

enum class Criterion { ml, majority };

Criterion parse_criterion(std::string_view name);
std::string_view to_string(Criterion criterion);

/// Fragment size in tokens; empty means the whole document.
struct FragmentLength {
    std::optional<std::size_t> tokens;

    static FragmentLength full() { return {}; }
    static FragmentLength of(std::size_t n);
    /// "full" or a positive integer.
    static FragmentLength parse(std::string_view text);

    bool is_full() const { return !tokens.has_value(); }
    std::string to_string() const;
    friend bool operator==(const FragmentLength&, const FragmentLength&) = default;
};

struct Fragment {
    std::string document_id;
    std::size_t index = 0;
    std::vector<TypeId> tokens;
    CountTable counts;
};

/// Consecutive non-overlapping slices; a shorter trailing slice is kept.
std::vector<Fragment> fragment(const TokenStream& stream, FragmentLength length,
                               const std::string& document_id = {});

/// Fragment-by-author log-probabilities with their new-type counts, row-major.
struct ScoreGrid {
    std::size_t fragments = 0;
    std::size_t authors = 0;
    std::vector<double> log_prob;
    std::vector<std::uint64_t> new_types;

    double at(std::size_t f, std::size_t a) const { return log_prob[f * authors + a]; }
    double& at(std::size_t f, std::size_t a) { return log_prob[f * authors + a]; }
    std::uint64_t new_at(std::size_t f, std::size_t a) const { return new_types[f * authors + a]; }

    static ScoreGrid from_rows(const std::vector<std::vector<double>>& rows);
};

/// Entry (f, a) scores fragment f against profile a, with the base specialized
/// per author according to base.strategy.
ScoreGrid score_grid(const std::vector<Fragment>& fragments, const std::vector<AuthorProfile>& profiles,
                     const BaseDistribution& base, unsigned workers = 1);

/// Column sums. -inf entries propagate.
std::vector<double> column_totals(const ScoreGrid& grid);

/// Argmax of the column sums; ties go to the lexicographically smallest id.
std::size_t attribute_ml(const ScoreGrid& grid, const std::vector<std::string>& author_ids);

/// Per-fragment argmax author (ties to the smallest id).
std::vector<std::size_t> fragment_winners(const ScoreGrid& grid, const std::vector<std::string>& author_ids);

/// Most fragment votes; vote ties go to the higher column sum, then the smallest id.
std::size_t attribute_majority(const ScoreGrid& grid, const std::vector<std::string>& author_ids);

struct AttributionResult {
    std::string document_id;
    std::map<std::string, double> scores;  // summed log-probability per author
    std::vector<std::string> votes;         // per-fragment winners
    std::string chosen;
    Criterion criterion = Criterion::ml;
};

AttributionResult attribute(const std::string& document_id, const ScoreGrid& grid,
                            const std::vector<std::string>& author_ids, Criterion criterion);

/// One JSONL row; -inf scores are written as null.
nlohmann::json to_json(const AttributionResult& result);

}  // namespace cp2d
