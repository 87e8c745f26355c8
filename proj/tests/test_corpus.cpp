#include <doctest.h>

#include <algorithm>
#include <set>

#include "cp2d/corpus.hpp"
#include "support.hpp"

using namespace cp2d;
using cp2d::testing::TempDir;
using cp2d::testing::write_file;

namespace {

Corpus labeled(const std::vector<std::pair<std::string, int>>& authors) {
    std::vector<Document> docs;
    for (const auto& [author, count] : authors)
        for (int i = 0; i < count; ++i) {
            Document d;
            d.id = author + "/d" + std::to_string(i);
            d.author_id = author;
            d.bytes = "text " + d.id;
            d.char_count = d.bytes.size();
            docs.push_back(d);
        }
    return make_corpus(std::move(docs), Encoding::latin1).corpus;
}

}  // namespace

TEST_CASE("directory tree loading drops single-document authors") {
    TempDir dir;
    write_file(dir / "A/one.txt", "first text by A");
    write_file(dir / "A/two.txt", "second text by A");
    write_file(dir / "B/only.txt", "the only text by B");
    const auto loaded = load_corpus(dir.path(), Layout::dir_tree, Encoding::latin1);
    CHECK(loaded.corpus.size() == 2);
    CHECK(loaded.corpus.author_ids() == std::vector<std::string>{"A"});
    CHECK(loaded.report.dropped_authors == std::vector<std::string>{"B"});
    CHECK(loaded.corpus.documents[0].id == "A/one");
    CHECK(loaded.corpus.documents[1].id == "A/two");
}

TEST_CASE("empty directory is an error") {
    TempDir dir;
    CHECK_THROWS_WITH_AS(load_corpus(dir.path(), Layout::dir_tree, Encoding::latin1), "empty corpus", DataError);
}

TEST_CASE("jsonl manifest loading") {
    TempDir dir;
    write_file(dir / "corpus.jsonl",
               "{\"id\":\"a1\",\"author\":\"A\",\"text\":\"alpha one\"}\n"
               "{\"id\":\"c1\",\"author\":\"C\",\"text\":\"gamma one\"}\n"
               "{\"id\":\"a2\",\"author\":\"A\",\"text\":\"alpha two\"}\n"
               "\n"
               "{\"id\":\"c2\",\"author\":\"C\",\"text\":\"gamma two\"}\n");
    const auto loaded = load_corpus(dir / "corpus.jsonl", Layout::jsonl_manifest, Encoding::latin1);
    CHECK(loaded.corpus.size() == 4);
    CHECK(loaded.corpus.authors.size() == 2);
    CHECK(loaded.report.dropped_authors.empty());
    CHECK(loaded.corpus.find("c2").has_value());

    write_file(dir / "dup.jsonl",
               "{\"id\":\"x\",\"author\":\"A\",\"text\":\"one\"}\n{\"id\":\"x\",\"author\":\"A\",\"text\":\"two\"}\n");
    CHECK_THROWS_AS(load_corpus(dir / "dup.jsonl", Layout::jsonl_manifest, Encoding::latin1), DataError);
}

TEST_CASE("transcode onto single-byte code pages") {
    CHECK(transcode("caf\xC3\xA9", Encoding::latin1) == std::string("caf\xE9"));
    CHECK(transcode("abc", Encoding::latin1) == "abc");
    // Greek alpha is absent from Latin-1 and goes through the transliteration table.
    CHECK(transcode("\xCE\xB1", Encoding::latin1) == "a");
    // Polish l-stroke exists in Latin-2 (0xB3) but not in Latin-1.
    CHECK(transcode("\xC5\x82", Encoding::latin2) == std::string("\xB3"));
    CHECK(transcode("\xC5\x82", Encoding::latin1) == "l");
    // Code page round trip through UTF-8 is the identity for every byte.
    for (const auto enc : {Encoding::latin1, Encoding::latin2}) {
        std::string all;
        for (int b = 1; b < 256; ++b) all.push_back(static_cast<char>(b));
        CHECK(transcode(to_utf8(all, enc), enc) == all);
    }
}

TEST_CASE("stratified folds") {
    SUBCASE("20 documents over 10 folds gives 2 per fold") {
        const auto corpus = labeled({{"A", 20}});
        const auto plan = stratified_folds(corpus, 10, 7);
        for (int f = 0; f < 10; ++f) CHECK(plan.test_indices(corpus, f).size() == 2);
    }
    SUBCASE("2-document author lands in two folds and trains everywhere") {
        const auto corpus = labeled({{"A", 2}, {"B", 11}});
        const auto plan = stratified_folds(corpus, 10, 3);
        CHECK(plan.assignment.at("A/d0") != plan.assignment.at("A/d1"));
        for (int f = 0; f < 10; ++f) {
            const auto train = plan.train_indices(corpus, f);
            CHECK(std::any_of(train.begin(), train.end(),
                              [&](std::size_t i) { return corpus.documents[i].author_id == "A"; }));
        }
    }
    SUBCASE("determinism and seed sensitivity") {
        const auto corpus = labeled({{"A", 9}, {"B", 7}, {"C", 4}});
        CHECK(stratified_folds(corpus, 3, 42).assignment == stratified_folds(corpus, 3, 42).assignment);
        bool differs = false;
        for (std::uint64_t seed = 1; seed < 6 && !differs; ++seed)
            differs = stratified_folds(corpus, 3, seed).assignment != stratified_folds(corpus, 3, 42).assignment;
        CHECK(differs);
    }
    SUBCASE("per-author fold sizes differ by at most one") {
        Rng rng(99);
        for (int trial = 0; trial < 20; ++trial) {
            const int k = 2 + static_cast<int>(rng.below(9));
            std::vector<std::pair<std::string, int>> authors;
            for (int a = 0; a < 5; ++a) authors.push_back({"a" + std::to_string(a), 2 + static_cast<int>(rng.below(30))});
            const auto corpus = labeled(authors);
            const auto plan = stratified_folds(corpus, k, rng.next_u64());
            for (const auto& [author, docs] : corpus.authors) {
                std::vector<int> sizes(k, 0);
                for (const auto i : docs) ++sizes[plan.assignment.at(corpus.documents[i].id)];
                const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
                CHECK(*hi - *lo <= 1);
            }
        }
    }
    CHECK_THROWS_AS(stratified_folds(labeled({{"A", 3}}), 1, 0), ConfigError);
}

TEST_CASE("leave-one-out enumeration") {
    const auto corpus = labeled({{"A", 2}, {"B", 3}});
    std::set<std::string> held;
    std::size_t pairs = 0;
    for (const auto split : leave_one_out(corpus)) {
        ++pairs;
        held.insert(corpus.documents[split.heldout].id);
        CHECK(std::find(split.train.begin(), split.train.end(), split.heldout) == split.train.end());
        CHECK(split.train.size() == corpus.size() - 1);
    }
    CHECK(pairs == 5);
    CHECK(held.size() == corpus.size());
}

TEST_CASE("split manifest") {
    const auto corpus = labeled({{"A", 3}});
    const auto manifest = parse_split_manifest(R"({"A/d0":"train","A/d1":"test","A/d2":"validation"})");
    CHECK(indices_with_role(corpus, manifest, SplitRole::train) == std::vector<std::size_t>{0});
    CHECK(indices_with_role(corpus, manifest, SplitRole::test) == std::vector<std::size_t>{1});
    CHECK_THROWS_AS(parse_split_manifest(R"({"A/d0":"dev"})"), DataError);
}
