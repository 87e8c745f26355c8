#include <doctest.h>

#include <cmath>

#include "cp2d/attribution.hpp"
#include "support.hpp"

using namespace cp2d;

namespace {

const std::vector<std::string> k_xy{"X", "Y"};

TokenStream stream_of(std::vector<TypeId> seq) {
    TokenStream s;
    s.counts = CountTable::from_sequence(seq);
    s.sequence = std::move(seq);
    return s;
}

AuthorProfile profile(const std::string& id, const std::vector<TypeId>& seq, double alpha, double theta) {
    AuthorProfile p;
    p.author_id = id;
    p.params = {alpha, theta};
    p.counts = CountTable::from_sequence(seq);
    return p;
}

}  // namespace

TEST_CASE("fragmenting a stream") {
    std::vector<TypeId> seq(10);
    for (TypeId i = 0; i < 10; ++i) seq[i] = i;
    const auto parts = fragment(stream_of(seq), FragmentLength::of(3), "d");
    REQUIRE(parts.size() == 4);
    CHECK(parts[0].tokens.size() == 3);
    CHECK(parts[1].tokens.size() == 3);
    CHECK(parts[2].tokens.size() == 3);
    CHECK(parts[3].tokens == std::vector<TypeId>{9});
    CHECK(parts[3].index == 3);
    CHECK(fragment(stream_of(seq), FragmentLength::full()).size() == 1);
    CHECK(fragment(stream_of(seq), FragmentLength::of(100)).size() == 1);
    CHECK_THROWS(FragmentLength::of(0));
    CHECK(FragmentLength::parse("full").is_full());
    CHECK(FragmentLength::parse("316") == FragmentLength::of(316));
    CHECK_THROWS_AS(FragmentLength::parse("-3"), ConfigError);
}

TEST_CASE("fragments partition the stream") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const auto seq = testing::random_sequence(rng, 1 + rng.below(500), 30);
        const std::size_t f = 1 + rng.below(60);
        const auto parts = fragment(stream_of(seq), FragmentLength::of(f));
        CHECK(parts.size() == (seq.size() + f - 1) / f);
        std::vector<TypeId> joined;
        for (const auto& p : parts) {
            joined.insert(joined.end(), p.tokens.begin(), p.tokens.end());
            CHECK(p.counts == CountTable::from_sequence(p.tokens));
        }
        CHECK(joined == seq);
    }
}

TEST_CASE("maximum likelihood decision") {
    CHECK(attribute_ml(ScoreGrid::from_rows({{-1, -2}, {-1, -2}}), k_xy) == 0);
    CHECK(attribute_ml(ScoreGrid::from_rows({{-5, -1}}), k_xy) == 1);
    // Exact ties go to the smallest id regardless of column order.
    CHECK(attribute_ml(ScoreGrid::from_rows({{-1, -1}}), {"Y", "X"}) == 1);
    CHECK(attribute_ml(ScoreGrid::from_rows({{k_neg_inf, -1e9}}), k_xy) == 1);
}

TEST_CASE("majority and maximum likelihood can disagree") {
    const auto grid = ScoreGrid::from_rows({{-1, -2}, {-1, -2}, {-10, -2}});
    CHECK(attribute_ml(grid, k_xy) == 1);
    CHECK(attribute_majority(grid, k_xy) == 0);
    const auto ml = attribute("doc", grid, k_xy, Criterion::ml);
    CHECK(ml.chosen == "Y");
    CHECK(ml.scores.at("X") == doctest::Approx(-12));
    const auto maj = attribute("doc", grid, k_xy, Criterion::majority);
    CHECK(maj.chosen == "X");
    CHECK(maj.votes == std::vector<std::string>{"X", "X", "Y"});
}

TEST_CASE("vote ties fall back to totals then ids") {
    CHECK(attribute_majority(ScoreGrid::from_rows({{-1, -2}, {-2, -2.0 + 1e-3}}), k_xy) == 0);
    CHECK(attribute_majority(ScoreGrid::from_rows({{-1, -3}, {-2, -1}}), k_xy) == 0);
    CHECK(attribute_majority(ScoreGrid::from_rows({{-3, -1}, {-1, -2}}), k_xy) == 1);
    CHECK(attribute_majority(ScoreGrid::from_rows({{-1, -2}, {-2, -1}}), k_xy) == 0);
}

TEST_CASE("decisions agree with direct argmax on random grids") {
    Rng rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t frags = 1 + rng.below(8), authors = 1 + rng.below(6);
        std::vector<std::vector<double>> rows(frags, std::vector<double>(authors));
        for (auto& row : rows)
            for (auto& v : row) v = -static_cast<double>(rng.below(6));  // coarse values force ties
        std::vector<std::string> ids;
        for (std::size_t a = 0; a < authors; ++a) ids.push_back(std::string(1, static_cast<char>('a' + a)));
        shuffle(ids, rng);
        const auto grid = ScoreGrid::from_rows(rows);

        // Oracle: lexicographic key (score desc, id asc).
        std::vector<double> totals(authors, 0);
        std::vector<int> votes(authors, 0);
        for (const auto& row : rows) {
            std::size_t w = 0;
            for (std::size_t a = 0; a < authors; ++a) {
                totals[a] += row[a];
                if (row[a] > row[w] || (row[a] == row[w] && ids[a] < ids[w])) w = a;
            }
            ++votes[w];
        }
        std::size_t ml = 0, maj = 0;
        for (std::size_t a = 1; a < authors; ++a) {
            if (totals[a] > totals[ml] || (totals[a] == totals[ml] && ids[a] < ids[ml])) ml = a;
            const auto key = [&](std::size_t i) { return std::make_tuple(votes[i], totals[i]); };
            if (key(a) > key(maj) || (key(a) == key(maj) && ids[a] < ids[maj])) maj = a;
        }
        CHECK(attribute_ml(grid, ids) == ml);
        CHECK(attribute_majority(grid, ids) == maj);
    }
}

TEST_CASE("score grid entries are continuation scores") {
    std::vector<AuthorProfile> profiles{profile("A", {0, 0, 1}, 0.5, 1.0), profile("B", {2, 2, 3}, 0.4, 2.0)};
    auto base = base_from_probabilities({0.4, 0.3, 0.1, 0.2});
    for (auto& p : profiles) bind_base(p, base);
    const auto parts = fragment(stream_of({0, 2, 1, 3}), FragmentLength::of(2));
    for (const auto strategy : {BaseStrategy::global, BaseStrategy::author_excluded}) {
        base.strategy = strategy;
        const auto grid = score_grid(parts, profiles, base, 2);
        for (std::size_t f = 0; f < parts.size(); ++f)
            for (std::size_t a = 0; a < profiles.size(); ++a) {
                const auto expected = score_text(profiles[a], parts[f].counts, base_for(base, profiles[a], strategy));
                CHECK(grid.at(f, a) == doctest::Approx(expected.log_prob));
                CHECK(grid.new_at(f, a) == expected.new_types);
            }
    }
    // Fragment (a, c) against A: 0.015 under the global base.
    base.strategy = BaseStrategy::global;
    CHECK(std::exp(score_grid(parts, profiles, base).at(0, 0)) == doctest::Approx(0.015));
}

TEST_CASE("result serialization") {
    const auto result = attribute("d1", ScoreGrid::from_rows({{k_neg_inf, -2.5}}), k_xy, Criterion::ml);
    const auto row = to_json(result);
    CHECK(row["id"] == "d1");
    CHECK(row["chosen"] == "Y");
    CHECK(row["scores"]["X"].is_null());
    CHECK(row["scores"]["Y"] == -2.5);
    CHECK(parse_criterion("majority") == Criterion::majority);
    CHECK_THROWS_AS(parse_criterion("vote"), ConfigError);
}
