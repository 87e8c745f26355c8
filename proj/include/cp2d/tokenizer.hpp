#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cp2d/common.hpp"
#include "cp2d/corpus.hpp"

namespace cp2d {

enum class TokenKind { osf, lz77, words };

struct TokenizerSpec {
    TokenKind kind = TokenKind::words;
    std::size_t ngram = 0;               // osf only
    std::optional<std::size_t> window;   // lz77 only; nullopt = unbounded

    static TokenizerSpec osf(std::size_t n);
    static TokenizerSpec lz77(std::optional<std::size_t> window = std::nullopt);
    static TokenizerSpec words();

    /// Accepts "osf:N", "lz77:W", "lz77:inf" and "words".
    static TokenizerSpec parse(std::string_view text);
    std::string to_string() const;

    friend bool operator==(const TokenizerSpec&, const TokenizerSpec&) = default;
    friend bool operator<(const TokenizerSpec& a, const TokenizerSpec& b) {
        return a.to_string() < b.to_string();
    }
};

/// Corpus-level token-string to id map; ids follow first-insertion order.
class Vocabulary {
public:
    TypeId intern(std::string_view token);
    std::optional<TypeId> find(std::string_view token) const;
    const std::string& token(TypeId id) const { return tokens_.at(id); }
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

private:
    std::unordered_map<std::string, TypeId> ids_;
    std::vector<std::string> tokens_;
};

/// Type-count multiset sorted by ascending type id.
class CountTable {
public:
    CountTable() = default;
    static CountTable from_sequence(const std::vector<TypeId>& sequence);
    static CountTable from_pairs(std::vector<std::pair<TypeId, std::uint64_t>> pairs);

    std::uint64_t count_of(TypeId id) const;
    bool contains(TypeId id) const { return count_of(id) > 0; }
    std::uint64_t total() const { return total_; }
    std::size_t distinct() const { return ids_.size(); }
    const std::vector<TypeId>& ids() const { return ids_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }

    void merge(const CountTable& other);
    /// Remove other's counts; every count in other must be present here.
    void subtract(const CountTable& other);

    friend bool operator==(const CountTable&, const CountTable&) = default;

private:
    std::vector<TypeId> ids_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

struct TokenStream {
    std::vector<TypeId> sequence;
    CountTable counts;

    std::uint64_t n() const { return sequence.size(); }
    std::size_t distinct() const { return counts.distinct(); }
};

/// r_i: number of types occurring exactly i times.
struct MultiplicitySpectrum {
    std::map<std::uint64_t, std::uint64_t> r;

    std::uint64_t distinct() const;
    std::uint64_t total() const;
};

MultiplicitySpectrum multiplicity_spectrum(const CountTable& counts);
inline MultiplicitySpectrum multiplicity_spectrum(const TokenStream& stream) {
    return multiplicity_spectrum(stream.counts);
}

/// Tabs, newlines and other ASCII whitespace become 0x20.
std::string normalize_spaces(std::string_view bytes);

// Raw token strings, in text order.
std::vector<std::string> osf_tokens(std::string_view bytes, std::size_t n);
std::vector<std::string> word_tokens(std::string_view bytes, Encoding encoding = Encoding::latin1);
std::vector<std::string> lz77_tokens(std::string_view bytes, std::optional<std::size_t> window);
std::vector<std::string> tokens_for(std::string_view bytes, const TokenizerSpec& spec,
                                    Encoding encoding = Encoding::latin1);

TokenStream make_stream(const std::vector<std::string>& tokens, Vocabulary& vocab);

TokenStream tokenize_osf(std::string_view bytes, std::size_t n, Vocabulary& vocab);
TokenStream tokenize_words(std::string_view bytes, Vocabulary& vocab,
                           Encoding encoding = Encoding::latin1);
TokenStream tokenize_lz77(std::string_view bytes, std::optional<std::size_t> window,
                          Vocabulary& vocab);

/// Token streams for every corpus document under one vocabulary. Documents are
/// tokenized concurrently and interned in document order.
struct TokenizedCorpus {
    TokenizerSpec spec;
    Vocabulary vocab;
    std::vector<TokenStream> streams;  // parallel to Corpus::documents
};

TokenizedCorpus tokenize_corpus(const Corpus& corpus, const TokenizerSpec& spec,
                                unsigned workers = 1);

/// Debug dump: one line per type, `id<TAB>count<TAB>token`, ascending id.
/// Tabs, newlines and backslashes inside tokens are escaped.
void write_token_dump(std::ostream& out, const TokenStream& stream, const Vocabulary& vocab);

namespace detail {
std::vector<std::int32_t> suffix_array(std::string_view text);
/// lcp[r] = common prefix length of suffixes sa[r-1] and sa[r]; lcp[0] = 0.
std::vector<std::int32_t> lcp_array(std::string_view text, const std::vector<std::int32_t>& sa);
}  // namespace detail

}  // namespace cp2d
