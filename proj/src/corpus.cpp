#include "cp2d/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "codepages.hpp"
#include "cp2d/common.hpp"

namespace cp2d {

namespace {

using Transliteration = std::unordered_map<char32_t, char>;

const Transliteration& transliteration() {
    static const Transliteration table = [] {
        Transliteration out;
        std::istringstream in{std::string(detail::k_translit_table)};
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos || line.compare(0, 2, "U+") != 0) continue;
            const auto cp = static_cast<char32_t>(std::stoul(line.substr(2, tab - 2), nullptr, 16));
            const std::string value = line.substr(tab + 1);
            out[cp] = value == "SPACE" ? ' ' : value.at(0);
        }
        return out;
    }();
    return table;
}

struct ReverseCodePage {
    std::unordered_map<char32_t, unsigned char> bytes;
};

const ReverseCodePage& reverse_code_page(Encoding encoding) {
    static const auto build = [](const detail::CodePage& page) {
        ReverseCodePage out;
        for (int b = 0; b < 256; ++b) out.bytes.emplace(page.to_unicode[b], static_cast<unsigned char>(b));
        return out;
    };
    static const ReverseCodePage latin1 = build(detail::k_latin1);
    static const ReverseCodePage latin2 = build(detail::k_latin2);
    return encoding == Encoding::latin2 ? latin2 : latin1;
}

// Decodes one UTF-8 sequence at text[pos]; returns the byte length, 0 if malformed.
std::size_t decode_utf8(std::string_view text, std::size_t pos, char32_t& out) {
    const auto lead = static_cast<unsigned char>(text[pos]);
    std::size_t len;
    char32_t cp;
    if (lead < 0x80) {
        out = lead;
        return 1;
    } else if ((lead & 0xE0) == 0xC0) {
        len = 2;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        len = 3;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        len = 4;
        cp = lead & 0x07;
    } else {
        return 0;
    }
    if (pos + len > text.size()) return 0;
    for (std::size_t i = 1; i < len; ++i) {
        const auto c = static_cast<unsigned char>(text[pos + i]);
        if ((c & 0xC0) != 0x80) return 0;
        cp = (cp << 6) | (c & 0x3F);
    }
    static constexpr char32_t min_for_len[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < min_for_len[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
    out = cp;
    return len;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Document make_document(std::string id, std::string author, std::string_view text,
                       Encoding encoding) {
    Document doc;
    doc.id = std::move(id);
    doc.author_id = std::move(author);
    doc.bytes = transcode(text, encoding);
    doc.char_count = doc.bytes.size();  // one byte per decoded character
    return doc;
}

}  // namespace

Encoding parse_encoding(std::string_view name) {
    if (name == "latin1" || name == "iso-8859-1") return Encoding::latin1;
    if (name == "latin2" || name == "iso-8859-2") return Encoding::latin2;
    throw ConfigError("unknown encoding '" + std::string(name) + "' (expected latin1|latin2)");
}

std::string_view to_string(Encoding encoding) {
    return encoding == Encoding::latin2 ? "latin2" : "latin1";
}

Layout parse_layout(std::string_view name) {
    if (name == "dir" || name == "dir_tree") return Layout::dir_tree;
    if (name == "jsonl" || name == "jsonl_manifest") return Layout::jsonl_manifest;
    throw ConfigError("unknown layout '" + std::string(name) + "' (expected dir|jsonl)");
}

std::string transcode(std::string_view text, Encoding encoding) {
    const auto& reverse = reverse_code_page(encoding);
    const auto& fallback = transliteration();
    std::string out;
    out.reserve(text.size());
    for (std::size_t pos = 0; pos < text.size();) {
        char32_t cp;
        const std::size_t len = decode_utf8(text, pos, cp);
        if (len == 0) {
            out.push_back(text[pos]);
            ++pos;
            continue;
        }
        pos += len;
        if (const auto it = reverse.bytes.find(cp); it != reverse.bytes.end()) {
            out.push_back(static_cast<char>(it->second));
        } else if (const auto jt = fallback.find(cp); jt != fallback.end()) {
            out.push_back(jt->second);
        } else {
            out.push_back('?');
        }
    }
    return out;
}

std::string to_utf8(std::string_view bytes, Encoding encoding) {
    const auto& page = detail::code_page(encoding);
    std::string out;
    out.reserve(bytes.size());
    for (const char c : bytes) {
        const char32_t cp = page.to_unicode[static_cast<unsigned char>(c)];
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

std::optional<std::size_t> Corpus::find(std::string_view id) const {
    for (std::size_t i = 0; i < documents.size(); ++i)
        if (documents[i].id == id) return i;
    return std::nullopt;
}

std::vector<std::string> Corpus::author_ids() const {
    std::vector<std::string> ids;
    ids.reserve(authors.size());
    for (const auto& [author, _] : authors) ids.push_back(author);
    return ids;
}

std::vector<std::size_t> Corpus::all_indices() const {
    std::vector<std::size_t> out(documents.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
}

std::vector<Document> load_documents(const std::filesystem::path& root, Layout layout,
                                     Encoding encoding) {
    namespace fs = std::filesystem;
    std::vector<Document> docs;
    std::error_code ec;
    if (layout == Layout::dir_tree) {
        if (!fs::is_directory(root, ec)) throw DataError("cannot read corpus directory " + root.string());
        for (const auto& entry : fs::directory_iterator(root)) {
            if (entry.is_regular_file()) {
                if (entry.path().extension() != ".txt") continue;
                const std::string text = read_file(entry.path());
                auto doc = make_document(entry.path().stem().string(), "", text, encoding);
                docs.push_back(std::move(doc));
            } else if (entry.is_directory()) {
                const std::string author = entry.path().filename().string();
                for (const auto& file : fs::directory_iterator(entry.path())) {
                    if (!file.is_regular_file() || file.path().extension() != ".txt") continue;
                    const std::string text = read_file(file.path());
                    auto doc = make_document(author + "/" + file.path().stem().string(), author,
                                             text, encoding);
                    docs.push_back(std::move(doc));
                }
            }
        }
    } else {
        std::ifstream in(root, std::ios::binary);
        if (!in) throw DataError("cannot read corpus manifest " + root.string());
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            nlohmann::json row;
            try {
                row = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw DataError(root.string() + ":" + std::to_string(line_no) + ": " + e.what());
            }
            if (!row.is_object() || !row.contains("id") || !row.contains("text"))
                throw DataError(root.string() + ":" + std::to_string(line_no) +
                                ": expected object with id and text");
            const std::string text = row["text"].get<std::string>();
            auto doc = make_document(row["id"].get<std::string>(),
                                     row.value("author", std::string{}), text, encoding);
            docs.push_back(std::move(doc));
        }
    }
    std::set<std::string> seen;
    for (const auto& doc : docs)
        if (!seen.insert(doc.id).second) throw DataError("duplicate document id '" + doc.id + "'");
    std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) {
        return std::tie(a.author_id, a.id) < std::tie(b.author_id, b.id);
    });
    return docs;
}

LoadedCorpus make_corpus(std::vector<Document> documents, Encoding encoding) {
    std::map<std::string, std::size_t> per_author;
    std::set<std::string> ids;
    for (const auto& doc : documents) {
        if (doc.author_id.empty()) throw DataError("document '" + doc.id + "' has no author");
        if (doc.bytes.empty()) throw DataError("document '" + doc.id + "' is empty");
        if (!ids.insert(doc.id).second) throw DataError("duplicate document id '" + doc.id + "'");
        ++per_author[doc.author_id];
    }
    LoadedCorpus out;
    out.corpus.encoding = encoding;
    for (const auto& [author, count] : per_author)
        if (count < 2) out.report.dropped_authors.push_back(author);
    std::sort(documents.begin(), documents.end(), [](const Document& a, const Document& b) {
        return std::tie(a.author_id, a.id) < std::tie(b.author_id, b.id);
    });
    for (auto& doc : documents) {
        if (per_author[doc.author_id] < 2) continue;
        out.corpus.authors[doc.author_id].push_back(out.corpus.documents.size());
        out.corpus.documents.push_back(std::move(doc));
    }
    if (out.corpus.documents.empty()) throw DataError("empty corpus");
    return out;
}

LoadedCorpus load_corpus(const std::filesystem::path& root, Layout layout, Encoding encoding) {
    return make_corpus(load_documents(root, layout, encoding), encoding);
}

Corpus subset(const Corpus& corpus, const std::vector<std::size_t>& indices) {
    std::vector<std::size_t> sorted = indices;
    std::sort(sorted.begin(), sorted.end());
    Corpus out;
    out.encoding = corpus.encoding;
    for (const std::size_t i : sorted) {
        const auto& doc = corpus.documents.at(i);
        out.authors[doc.author_id].push_back(out.documents.size());
        out.documents.push_back(doc);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::test_indices(const Corpus& corpus, int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (assignment.at(corpus.documents[i].id) == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldPlan::train_indices(const Corpus& corpus, int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (assignment.at(corpus.documents[i].id) != fold) out.push_back(i);
    return out;
}

FoldPlan stratified_folds(const Corpus& corpus, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("number of folds must be at least 2");
    FoldPlan plan;
    plan.k = k;
    Rng rng(seed);
    std::size_t offset = 0;
    for (const auto& [author, indices] : corpus.authors) {
        if (indices.size() < 2) throw DataError("author '" + author + "' has fewer than 2 documents");
        std::vector<std::size_t> order = indices;
        shuffle(order, rng);
        for (std::size_t j = 0; j < order.size(); ++j)
            plan.assignment[corpus.documents[order[j]].id] = static_cast<int>((offset + j) % k);
        offset = (offset + order.size()) % k;
    }
    return plan;
}

LeaveOneOut::LeaveOneOut(const Corpus& corpus) : corpus_(&corpus) {
    if (corpus.documents.empty()) throw DataError("empty corpus");
}

LooSplit LeaveOneOut::iterator::operator*() const {
    LooSplit split;
    split.heldout = pos_;
    split.train.reserve(corpus_->size() - 1);
    for (std::size_t i = 0; i < corpus_->size(); ++i)
        if (i != pos_) split.train.push_back(i);
    const auto& author = corpus_->documents[pos_].author_id;
    const bool author_left = std::any_of(split.train.begin(), split.train.end(), [&](std::size_t i) {
        return corpus_->documents[i].author_id == author;
    });
    if (!author_left) throw DataError("author '" + author + "' has no training documents left");
    return split;
}

LeaveOneOut leave_one_out(const Corpus& corpus) { return LeaveOneOut(corpus); }

SplitManifest parse_split_manifest(std::string_view json_text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("split manifest: ") + e.what());
    }
    if (!root.is_object()) throw DataError("split manifest must be a JSON object");
    SplitManifest out;
    for (const auto& [id, role] : root.items()) {
        const auto name = role.get<std::string>();
        if (name == "train") out[id] = SplitRole::train;
        else if (name == "validation") out[id] = SplitRole::validation;
        else if (name == "test") out[id] = SplitRole::test;
        else throw DataError("split manifest: unknown role '" + name + "' for " + id);
    }
    return out;
}

SplitManifest load_split_manifest(const std::filesystem::path& path) {
    return parse_split_manifest(read_file(path));
}

std::vector<std::size_t> indices_with_role(const Corpus& corpus, const SplitManifest& manifest,
                                           SplitRole role) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto it = manifest.find(corpus.documents[i].id);
        if (it != manifest.end() && it->second == role) out.push_back(i);
    }
    return out;
}

}  // namespace cp2d
