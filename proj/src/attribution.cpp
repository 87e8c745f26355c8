#include "cp2d/attribution.hpp"

#include <charconv>
#include <cmath>

namespace cp2d {

Criterion parse_criterion(std::string_view name) {
    if (name == "ml") return Criterion::ml;
    if (name == "majority") return Criterion::majority;
    throw ConfigError("unknown criterion '" + std::string(name) + "' (expected ml|majority)");
}

std::string_view to_string(Criterion criterion) {
    return criterion == Criterion::ml ? "ml" : "majority";
}

FragmentLength FragmentLength::of(std::size_t n) {
    if (n < 1) throw ConfigError("fragment length must be at least 1");
    return {n};
}

FragmentLength FragmentLength::parse(std::string_view text) {
    if (text == "full") return full();
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError("invalid fragment length '" + std::string(text) + "' (expected integer|full)");
    return of(value);
}

std::string FragmentLength::to_string() const {
    return tokens ? std::to_string(*tokens) : "full";
}

std::vector<Fragment> fragment(const TokenStream& stream, FragmentLength length,
                               const std::string& document_id) {
    if (stream.sequence.empty()) throw std::invalid_argument("fragment: empty token stream");
    const std::size_t n = stream.sequence.size();
    const std::size_t size = length.tokens ? *length.tokens : n;
    if (size < 1) throw ConfigError("fragment length must be at least 1");
    std::vector<Fragment> out;
    out.reserve((n + size - 1) / size);
    for (std::size_t start = 0, index = 0; start < n; start += size, ++index) {
        Fragment f;
        f.document_id = document_id;
        f.index = index;
        f.tokens.assign(stream.sequence.begin() + static_cast<std::ptrdiff_t>(start),
                        stream.sequence.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + size)));
        f.counts = CountTable::from_sequence(f.tokens);
        out.push_back(std::move(f));
    }
    return out;
}

ScoreGrid ScoreGrid::from_rows(const std::vector<std::vector<double>>& rows) {
    ScoreGrid grid;
    grid.fragments = rows.size();
    grid.authors = rows.empty() ? 0 : rows.front().size();
    for (const auto& row : rows) {
        if (row.size() != grid.authors) throw std::invalid_argument("ScoreGrid: ragged rows");
        grid.log_prob.insert(grid.log_prob.end(), row.begin(), row.end());
    }
    grid.new_types.assign(grid.log_prob.size(), 0);
    return grid;
}

ScoreGrid score_grid(const std::vector<Fragment>& fragments, const std::vector<AuthorProfile>& profiles,
                     const BaseDistribution& base, unsigned workers) {
    ScoreGrid grid;
    grid.fragments = fragments.size();
    grid.authors = profiles.size();
    grid.log_prob.assign(grid.fragments * grid.authors, 0.0);
    grid.new_types.assign(grid.fragments * grid.authors, 0);
    std::vector<BaseDistribution> bases;
    bases.reserve(profiles.size());
    for (const auto& p : profiles) bases.push_back(base_for(base, p, base.strategy));
    parallel_for(grid.log_prob.size(), workers, [&](std::size_t cell) {
        const std::size_t f = cell / grid.authors;
        const std::size_t a = cell % grid.authors;
        const auto score = score_text(profiles[a], fragments[f].counts, bases[a]);
        grid.log_prob[cell] = score.log_prob;
        grid.new_types[cell] = score.new_types;
    });
    return grid;
}

std::vector<double> column_totals(const ScoreGrid& grid) {
    std::vector<double> totals(grid.authors, 0.0);
    for (std::size_t f = 0; f < grid.fragments; ++f)
        for (std::size_t a = 0; a < grid.authors; ++a) totals[a] += grid.at(f, a);
    return totals;
}

namespace {

// Index of the maximum value; ties go to the smallest author id.
std::size_t argmax_by_id(const std::vector<double>& values, const std::vector<std::string>& ids) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < values.size(); ++a) {
        if (values[a] > values[best] || (values[a] == values[best] && ids[a] < ids[best])) best = a;
    }
    return best;
}

void check_grid(const ScoreGrid& grid, const std::vector<std::string>& author_ids) {
    if (grid.fragments == 0 || grid.authors == 0) throw std::invalid_argument("attribution: empty score grid");
    if (author_ids.size() != grid.authors) throw std::invalid_argument("attribution: author list does not match grid");
}

}  // namespace

std::size_t attribute_ml(const ScoreGrid& grid, const std::vector<std::string>& author_ids) {
    check_grid(grid, author_ids);
    return argmax_by_id(column_totals(grid), author_ids);
}

std::vector<std::size_t> fragment_winners(const ScoreGrid& grid, const std::vector<std::string>& author_ids) {
    check_grid(grid, author_ids);
    std::vector<std::size_t> winners(grid.fragments);
    std::vector<double> row(grid.authors);
    for (std::size_t f = 0; f < grid.fragments; ++f) {
        for (std::size_t a = 0; a < grid.authors; ++a) row[a] = grid.at(f, a);
        winners[f] = argmax_by_id(row, author_ids);
    }
    return winners;
}

std::size_t attribute_majority(const ScoreGrid& grid, const std::vector<std::string>& author_ids) {
    const auto winners = fragment_winners(grid, author_ids);
    std::vector<std::size_t> votes(grid.authors, 0);
    for (const auto w : winners) ++votes[w];
    const auto totals = column_totals(grid);
    std::size_t best = 0;
    for (std::size_t a = 1; a < grid.authors; ++a) {
        if (votes[a] != votes[best]) {
            if (votes[a] > votes[best]) best = a;
        } else if (totals[a] != totals[best]) {
            if (totals[a] > totals[best]) best = a;
        } else if (author_ids[a] < author_ids[best]) {
            best = a;
        }
    }
    return best;
}

AttributionResult attribute(const std::string& document_id, const ScoreGrid& grid,
                            const std::vector<std::string>& author_ids, Criterion criterion) {
    AttributionResult result;
    result.document_id = document_id;
    result.criterion = criterion;
    const auto totals = column_totals(grid);
    for (std::size_t a = 0; a < grid.authors; ++a) result.scores[author_ids[a]] = totals[a];
    for (const auto w : fragment_winners(grid, author_ids)) result.votes.push_back(author_ids[w]);
    const std::size_t chosen =
        criterion == Criterion::ml ? attribute_ml(grid, author_ids) : attribute_majority(grid, author_ids);
    result.chosen = author_ids[chosen];
    return result;
}

nlohmann::json to_json(const AttributionResult& result) {
    nlohmann::json scores = nlohmann::json::object();
    for (const auto& [author, value] : result.scores)
        scores[author] = std::isfinite(value) ? nlohmann::json(value) : nlohmann::json(nullptr);
    return {{"id", result.document_id},
            {"chosen", result.chosen},
            {"criterion", std::string(to_string(result.criterion))},
            {"scores", scores},
            {"votes", result.votes}};
}

}  // namespace cp2d
