#include "cp2d/tokenizer.hpp"

#include <algorithm>
#include <charconv>

#include "codepages.hpp"

namespace cp2d {

TokenizerSpec TokenizerSpec::osf(std::size_t n) {
    if (n < 3) throw ConfigError("OSF n-gram length must be at least 3");
    TokenizerSpec spec;
    spec.kind = TokenKind::osf;
    spec.ngram = n;
    return spec;
}

TokenizerSpec TokenizerSpec::lz77(std::optional<std::size_t> window) {
    if (window && *window < 1) throw ConfigError("LZ77 window must be at least 1");
    TokenizerSpec spec;
    spec.kind = TokenKind::lz77;
    spec.window = window;
    return spec;
}

TokenizerSpec TokenizerSpec::words() { return TokenizerSpec{}; }

TokenizerSpec TokenizerSpec::parse(std::string_view text) {
    const auto parse_size = [&](std::string_view digits) {
        std::size_t value = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
        if (ec != std::errc{} || ptr != digits.data() + digits.size())
            throw ConfigError("invalid token specification '" + std::string(text) + "'");
        return value;
    };
    if (text == "words") return words();
    if (text.starts_with("osf:")) return osf(parse_size(text.substr(4)));
    if (text == "lz77" || text == "lz77:inf") return lz77();
    if (text.starts_with("lz77:")) return lz77(parse_size(text.substr(5)));
    throw ConfigError("invalid token specification '" + std::string(text) +
                      "' (expected osf:N | lz77:W | words)");
}

std::string TokenizerSpec::to_string() const {
    switch (kind) {
        case TokenKind::osf: return "osf:" + std::to_string(ngram);
        case TokenKind::lz77: return window ? "lz77:" + std::to_string(*window) : "lz77:inf";
        case TokenKind::words: return "words";
    }
    return "words";
}

TypeId Vocabulary::intern(std::string_view token) {
    auto [it, inserted] = ids_.try_emplace(std::string(token), static_cast<TypeId>(tokens_.size()));
    if (inserted) tokens_.emplace_back(token);
    return it->second;
}

std::optional<TypeId> Vocabulary::find(std::string_view token) const {
    const auto it = ids_.find(std::string(token));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

CountTable CountTable::from_sequence(const std::vector<TypeId>& sequence) {
    std::vector<TypeId> sorted = sequence;
    std::sort(sorted.begin(), sorted.end());
    CountTable table;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        table.ids_.push_back(sorted[i]);
        table.counts_.push_back(j - i);
        i = j;
    }
    table.total_ = sorted.size();
    return table;
}

CountTable CountTable::from_pairs(std::vector<std::pair<TypeId, std::uint64_t>> pairs) {
    std::sort(pairs.begin(), pairs.end());
    CountTable table;
    for (const auto& [id, count] : pairs) {
        if (count == 0) continue;
        if (!table.ids_.empty() && table.ids_.back() == id) {
            table.counts_.back() += count;
        } else {
            table.ids_.push_back(id);
            table.counts_.push_back(count);
        }
        table.total_ += count;
    }
    return table;
}

std::uint64_t CountTable::count_of(TypeId id) const {
    const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return 0;
    return counts_[static_cast<std::size_t>(it - ids_.begin())];
}

void CountTable::merge(const CountTable& other) {
    std::vector<TypeId> ids;
    std::vector<std::uint64_t> counts;
    ids.reserve(ids_.size() + other.ids_.size());
    counts.reserve(ids.capacity());
    std::size_t i = 0, j = 0;
    while (i < ids_.size() || j < other.ids_.size()) {
        if (j == other.ids_.size() || (i < ids_.size() && ids_[i] < other.ids_[j])) {
            ids.push_back(ids_[i]);
            counts.push_back(counts_[i++]);
        } else if (i == ids_.size() || other.ids_[j] < ids_[i]) {
            ids.push_back(other.ids_[j]);
            counts.push_back(other.counts_[j++]);
        } else {
            ids.push_back(ids_[i]);
            counts.push_back(counts_[i++] + other.counts_[j++]);
        }
    }
    ids_ = std::move(ids);
    counts_ = std::move(counts);
    total_ += other.total_;
}

void CountTable::subtract(const CountTable& other) {
    std::size_t i = 0;
    for (std::size_t j = 0; j < other.ids_.size(); ++j) {
        while (i < ids_.size() && ids_[i] < other.ids_[j]) ++i;
        if (i == ids_.size() || ids_[i] != other.ids_[j] || counts_[i] < other.counts_[j])
            throw std::invalid_argument("CountTable::subtract: not a sub-multiset");
        counts_[i] -= other.counts_[j];
    }
    total_ -= other.total_;
    std::size_t out = 0;
    for (std::size_t k = 0; k < ids_.size(); ++k) {
        if (counts_[k] == 0) continue;
        ids_[out] = ids_[k];
        counts_[out++] = counts_[k];
    }
    ids_.resize(out);
    counts_.resize(out);
}

std::uint64_t MultiplicitySpectrum::distinct() const {
    std::uint64_t d = 0;
    for (const auto& [mult, count] : r) d += count;
    return d;
}

std::uint64_t MultiplicitySpectrum::total() const {
    std::uint64_t n = 0;
    for (const auto& [mult, count] : r) n += mult * count;
    return n;
}

MultiplicitySpectrum multiplicity_spectrum(const CountTable& counts) {
    MultiplicitySpectrum spectrum;
    for (const auto c : counts.counts()) ++spectrum.r[c];
    return spectrum;
}

std::string normalize_spaces(std::string_view bytes) {
    std::string out(bytes);
    for (auto& c : out)
        if (c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') c = ' ';
    return out;
}

std::vector<std::string> osf_tokens(std::string_view bytes, std::size_t n) {
    if (n < 3) throw ConfigError("OSF n-gram length must be at least 3");
    const std::string text = normalize_spaces(bytes);
    std::vector<std::string> out;
    if (text.size() < n) return out;
    // spaces in the window interior [i+1, i+n-2]
    std::size_t interior = 0;
    for (std::size_t p = 1; p + 1 < n; ++p) interior += text[p] == ' ';
    for (std::size_t i = 0;; ++i) {
        if (interior == 0) out.emplace_back(text.substr(i, n));
        if (i + n >= text.size()) break;
        interior -= text[i + 1] == ' ';
        interior += text[i + n - 1] == ' ';
    }
    return out;
}

std::vector<std::string> word_tokens(std::string_view bytes, Encoding encoding) {
    const auto& page = detail::code_page(encoding);
    std::vector<std::string> out;
    std::string current;
    for (const char c : bytes) {
        const auto b = static_cast<unsigned char>(c);
        if (page.is_letter[b]) {
            current.push_back(static_cast<char>(page.to_lower[b]));
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

namespace detail {

std::vector<std::int32_t> suffix_array(std::string_view text) {
    // Prefix doubling over cyclic shifts of text + sentinel, radix-sorted each round.
    const std::size_t n = text.size() + 1;
    std::vector<std::int32_t> sa(n), rank(n), tmp(n), shifted(n);
    std::vector<std::int32_t> bucket(std::max<std::size_t>(n, 257), 0);
    for (std::size_t i = 0; i < n; ++i)
        rank[i] = i + 1 < n ? static_cast<unsigned char>(text[i]) + 1 : 0;
    for (std::size_t i = 0; i < n; ++i) ++bucket[rank[i]];
    for (std::size_t c = 1; c < bucket.size(); ++c) bucket[c] += bucket[c - 1];
    for (std::size_t i = n; i-- > 0;) sa[--bucket[rank[i]]] = static_cast<std::int32_t>(i);
    std::int32_t classes = 1;
    tmp[sa[0]] = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (rank[sa[i]] != rank[sa[i - 1]]) ++classes;
        tmp[sa[i]] = classes - 1;
    }
    rank.swap(tmp);
    for (std::size_t half = 1; half < n && classes < static_cast<std::int32_t>(n); half <<= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto s = static_cast<std::int64_t>(sa[i]) - static_cast<std::int64_t>(half);
            shifted[i] = static_cast<std::int32_t>(s < 0 ? s + static_cast<std::int64_t>(n) : s);
        }
        std::fill(bucket.begin(), bucket.begin() + classes, 0);
        for (std::size_t i = 0; i < n; ++i) ++bucket[rank[shifted[i]]];
        for (std::int32_t c = 1; c < classes; ++c) bucket[c] += bucket[c - 1];
        for (std::size_t i = n; i-- > 0;) sa[--bucket[rank[shifted[i]]]] = shifted[i];
        tmp[sa[0]] = 0;
        classes = 1;
        for (std::size_t i = 1; i < n; ++i) {
            const std::size_t a = sa[i], b = sa[i - 1];
            if (rank[a] != rank[b] || rank[(a + half) % n] != rank[(b + half) % n]) ++classes;
            tmp[a] = classes - 1;
        }
        rank.swap(tmp);
    }
    sa.erase(sa.begin());  // drop the sentinel suffix
    return sa;
}

std::vector<std::int32_t> lcp_array(std::string_view text, const std::vector<std::int32_t>& sa) {
    const std::size_t n = sa.size();
    std::vector<std::int32_t> rank(n), lcp(n, 0);
    for (std::size_t r = 0; r < n; ++r) rank[sa[r]] = static_cast<std::int32_t>(r);
    std::size_t h = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (rank[i] == 0) {
            h = 0;
            continue;
        }
        const std::size_t j = sa[rank[i] - 1];
        while (i + h < n && j + h < n && text[i + h] == text[j + h]) ++h;
        lcp[rank[i]] = static_cast<std::int32_t>(h);
        if (h > 0) --h;
    }
    return lcp;
}

}  // namespace detail

std::vector<std::string> lz77_tokens(std::string_view bytes, std::optional<std::size_t> window) {
    if (window && *window < 1) throw ConfigError("LZ77 window must be at least 1");
    std::vector<std::string> out;
    const std::size_t n = bytes.size();
    if (n == 0) return out;
    const auto sa = detail::suffix_array(bytes);
    const auto lcp = detail::lcp_array(bytes, sa);
    std::vector<std::int32_t> rank(n);
    for (std::size_t r = 0; r < n; ++r) rank[sa[r]] = static_cast<std::int32_t>(r);

    const auto in_window = [&](std::size_t candidate, std::size_t pos) {
        return candidate < pos && (!window || pos - candidate <= *window);
    };
    // Longest match for suffix pos among earlier starts in the window. Walking
    // away from pos in suffix-array order, the running LCP minimum is the match
    // length, so each direction stops at its first in-window start.
    const auto longest_match = [&](std::size_t pos) {
        std::size_t best = 0;
        std::size_t run = n;
        for (std::size_t r = rank[pos]; r > 0; --r) {
            run = std::min<std::size_t>(run, lcp[r]);
            if (run < 2 || run <= best) break;
            if (in_window(sa[r - 1], pos)) {
                best = run;
                break;
            }
        }
        run = n;
        for (std::size_t r = rank[pos] + 1; r < n; ++r) {
            run = std::min<std::size_t>(run, lcp[r]);
            if (run < 2 || run <= best) break;
            if (in_window(sa[r], pos)) {
                best = run;
                break;
            }
        }
        return best;
    };

    for (std::size_t pos = 0; pos < n;) {
        const std::size_t len = longest_match(pos);
        const std::size_t take = len >= 2 ? len : 1;
        out.emplace_back(bytes.substr(pos, take));
        pos += take;
    }
    return out;
}

std::vector<std::string> tokens_for(std::string_view bytes, const TokenizerSpec& spec,
                                    Encoding encoding) {
    switch (spec.kind) {
        case TokenKind::osf: return osf_tokens(bytes, spec.ngram);
        case TokenKind::lz77: return lz77_tokens(bytes, spec.window);
        case TokenKind::words: return word_tokens(bytes, encoding);
    }
    return {};
}

TokenStream make_stream(const std::vector<std::string>& tokens, Vocabulary& vocab) {
    TokenStream stream;
    stream.sequence.reserve(tokens.size());
    for (const auto& t : tokens) stream.sequence.push_back(vocab.intern(t));
    stream.counts = CountTable::from_sequence(stream.sequence);
    return stream;
}

TokenStream tokenize_osf(std::string_view bytes, std::size_t n, Vocabulary& vocab) {
    return make_stream(osf_tokens(bytes, n), vocab);
}

TokenStream tokenize_words(std::string_view bytes, Vocabulary& vocab, Encoding encoding) {
    return make_stream(word_tokens(bytes, encoding), vocab);
}

TokenStream tokenize_lz77(std::string_view bytes, std::optional<std::size_t> window,
                          Vocabulary& vocab) {
    return make_stream(lz77_tokens(bytes, window), vocab);
}

TokenizedCorpus tokenize_corpus(const Corpus& corpus, const TokenizerSpec& spec, unsigned workers) {
    TokenizedCorpus out;
    out.spec = spec;
    out.streams.resize(corpus.size());
    const std::size_t chunk = std::max<std::size_t>(resolve_workers(workers), 1) * 4;
    std::vector<std::vector<std::string>> raw;
    for (std::size_t start = 0; start < corpus.size(); start += chunk) {
        const std::size_t stop = std::min(corpus.size(), start + chunk);
        raw.assign(stop - start, {});
        parallel_for(stop - start, workers, [&](std::size_t i) {
            raw[i] = tokens_for(corpus.documents[start + i].bytes, spec, corpus.encoding);
        });
        for (std::size_t i = start; i < stop; ++i) out.streams[i] = make_stream(raw[i - start], out.vocab);
    }
    return out;
}

namespace {
std::string escape_token(const std::string& token) {
    std::string out;
    for (const char c : token) {
        switch (c) {
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\\': out += "\\\\"; break;
            default: out.push_back(c);
        }
    }
    return out;
}
}  // namespace

void write_token_dump(std::ostream& out, const TokenStream& stream, const Vocabulary& vocab) {
    const auto& ids = stream.counts.ids();
    const auto& counts = stream.counts.counts();
    for (std::size_t i = 0; i < ids.size(); ++i)
        out << ids[i] << '\t' << counts[i] << '\t' << escape_token(vocab.token(ids[i])) << '\n';
}

}  // namespace cp2d
