#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "cp2d/tokenizer.hpp"
#include "support.hpp"

using namespace cp2d;

namespace {

using Tokens = std::vector<std::string>;

// Reference scans, written for clarity over speed.
Tokens naive_osf(const std::string& text, std::size_t n) {
    Tokens out;
    const std::string s = normalize_spaces(text);
    for (std::size_t i = 0; i + n <= s.size(); ++i) {
        bool ok = true;
        for (std::size_t j = 1; j + 1 < n; ++j) ok = ok && s[i + j] != ' ';
        if (ok) out.push_back(s.substr(i, n));
    }
    return out;
}

Tokens naive_lz77(const std::string& s, std::optional<std::size_t> window) {
    Tokens out;
    for (std::size_t pos = 0; pos < s.size();) {
        std::size_t best = 0;
        const std::size_t first = window && pos > *window ? pos - *window : 0;
        for (std::size_t src = first; src < pos; ++src) {
            std::size_t len = 0;
            while (pos + len < s.size() && s[src + len] == s[pos + len]) ++len;
            best = std::max(best, len);
        }
        const std::size_t take = best >= 2 ? best : 1;
        out.push_back(s.substr(pos, take));
        pos += take;
    }
    return out;
}

}  // namespace

TEST_CASE("tokenizer spec parsing") {
    CHECK(TokenizerSpec::parse("osf:4") == TokenizerSpec::osf(4));
    CHECK(TokenizerSpec::parse("lz77:inf") == TokenizerSpec::lz77());
    CHECK(TokenizerSpec::parse("lz77:64") == TokenizerSpec::lz77(64));
    CHECK(TokenizerSpec::parse("words") == TokenizerSpec::words());
    CHECK(TokenizerSpec::parse("osf:7").to_string() == "osf:7");
    CHECK_THROWS_AS(TokenizerSpec::parse("osf:2"), ConfigError);
    CHECK_THROWS_AS(TokenizerSpec::parse("lz77:0"), ConfigError);
    CHECK_THROWS_AS(TokenizerSpec::parse("bigrams"), ConfigError);
}

TEST_CASE("OSF windows keep spaces only at the edges") {
    CHECK(osf_tokens("the red cat", 4) == Tokens{"the ", " red", "red ", " cat"});
    CHECK(osf_tokens("a cat", 4) == Tokens{" cat"});
    CHECK(osf_tokens("abc", 4).empty());
    CHECK(osf_tokens("a\tb\ncd", 3) == naive_osf("a\tb\ncd", 3));
}

TEST_CASE("OSF agrees with a naive window scan") {
    Rng rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        const auto text = testing::random_text(rng, "ab  c\td", rng.below(60));
        const std::size_t n = 3 + rng.below(5);
        CHECK(osf_tokens(text, n) == naive_osf(text, n));
    }
}

TEST_CASE("word tokens") {
    CHECK(word_tokens("Hello, world!") == Tokens{"hello", "world"});
    CHECK(word_tokens("").empty());
    Vocabulary vocab;
    const auto stream = tokenize_words("ABC ABC", vocab);
    CHECK(stream.sequence == std::vector<TypeId>{0, 0});
    CHECK(stream.distinct() == 1);
    CHECK(stream.n() == 2);
    // Latin-1 capital E acute lowercases within the code page; digits split words.
    CHECK(word_tokens("\xC9t\xC9 2024x", Encoding::latin1) == Tokens{"\xE9t\xE9", "x"});
    // 0xA3 is a letter (L-stroke) in Latin-2 but the pound sign in Latin-1.
    CHECK(word_tokens("\xA3od\xBC", Encoding::latin2) == Tokens{"\xB3od\xBC"});
    CHECK(word_tokens("\xA3od", Encoding::latin1) == Tokens{"od"});
}

TEST_CASE("LZ77 examples") {
    CHECK(lz77_tokens("abababab", std::nullopt) == Tokens{"a", "b", "ababab"});
    CHECK(lz77_tokens("abcd", std::nullopt) == Tokens{"a", "b", "c", "d"});
    CHECK(lz77_tokens("abcd", 2) == Tokens{"a", "b", "c", "d"});
    CHECK(lz77_tokens("aaaa", 1) == Tokens{"a", "aaa"});
    CHECK(lz77_tokens("", std::nullopt).empty());
    CHECK_THROWS_AS(lz77_tokens("abc", 0), ConfigError);
}

TEST_CASE("LZ77 matches a quadratic reference parse and reconstructs the text") {
    Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const auto text = testing::random_text(rng, trial % 2 ? "ab" : "abc d", rng.below(120));
        std::optional<std::size_t> window;
        if (trial % 3) window = 1 + rng.below(16);
        const auto tokens = lz77_tokens(text, window);
        CHECK(tokens == naive_lz77(text, window));
        CHECK(std::accumulate(tokens.begin(), tokens.end(), std::string{}) == text);
    }
}

TEST_CASE("suffix and LCP arrays against direct sorting") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const auto text = testing::random_text(rng, "abc", 1 + rng.below(80));
        const auto sa = detail::suffix_array(text);
        std::vector<std::int32_t> expected(text.size());
        std::iota(expected.begin(), expected.end(), 0);
        std::sort(expected.begin(), expected.end(), [&](int a, int b) { return text.substr(a) < text.substr(b); });
        CHECK(sa == expected);
        const auto lcp = detail::lcp_array(text, sa);
        CHECK(lcp[0] == 0);
        for (std::size_t r = 1; r < sa.size(); ++r) {
            std::int32_t l = 0;
            while (sa[r - 1] + l < static_cast<int>(text.size()) && sa[r] + l < static_cast<int>(text.size()) &&
                   text[sa[r - 1] + l] == text[sa[r] + l])
                ++l;
            CHECK(lcp[r] == l);
        }
    }
}

TEST_CASE("multiplicity spectrum") {
    const auto counts = CountTable::from_pairs({{0, 2}, {1, 1}, {2, 1}});
    const auto r = multiplicity_spectrum(counts);
    CHECK(r.r == std::map<std::uint64_t, std::uint64_t>{{1, 2}, {2, 1}});
    CHECK(r.distinct() == 3);
    CHECK(r.total() == 4);
    CHECK(multiplicity_spectrum(CountTable{}).r.empty());
    CHECK(multiplicity_spectrum(CountTable::from_pairs({{9, 5}})).r == std::map<std::uint64_t, std::uint64_t>{{5, 1}});

    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const auto seq = testing::random_sequence(rng, 1 + rng.below(500), 40);
        const auto table = CountTable::from_sequence(seq);
        const auto spec = multiplicity_spectrum(table);
        CHECK(spec.distinct() == table.distinct());
        CHECK(spec.total() == seq.size());
        CHECK(table.total() == seq.size());
    }
}

TEST_CASE("count table merge and subtract") {
    auto a = CountTable::from_sequence({1, 1, 4, 7});
    const auto b = CountTable::from_sequence({4, 2});
    a.merge(b);
    CHECK(a == CountTable::from_pairs({{1, 2}, {2, 1}, {4, 2}, {7, 1}}));
    a.subtract(b);
    CHECK(a == CountTable::from_sequence({1, 1, 4, 7}));
    CHECK(a.count_of(3) == 0);
    CHECK(a.count_of(1) == 2);
}

TEST_CASE("corpus tokenization is independent of the worker count") {
    Corpus corpus;
    Rng rng(6);
    for (int i = 0; i < 40; ++i) {
        Document d;
        d.id = "A/" + std::to_string(i);
        d.author_id = "A";
        d.bytes = testing::random_text(rng, "the cat sat on a mat ", 200);
        corpus.documents.push_back(d);
    }
    for (const auto& spec : {TokenizerSpec::osf(4), TokenizerSpec::lz77(), TokenizerSpec::words()}) {
        const auto one = tokenize_corpus(corpus, spec, 1);
        const auto four = tokenize_corpus(corpus, spec, 4);
        CHECK(one.vocab.tokens() == four.vocab.tokens());
        for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(one.streams[i].sequence == four.streams[i].sequence);
    }
}

TEST_CASE("token dump format") {
    Vocabulary vocab;
    const auto stream = make_stream({"b\tx", "a", "b\tx"}, vocab);
    std::ostringstream out;
    write_token_dump(out, stream, vocab);
    CHECK(out.str() == "0\t2\tb\\tx\n1\t1\ta\n");
}
