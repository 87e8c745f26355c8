#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cp2d {

enum class Encoding { latin1, latin2 };
enum class Layout { dir_tree, jsonl_manifest };

Encoding parse_encoding(std::string_view name);
std::string_view to_string(Encoding encoding);
Layout parse_layout(std::string_view name);

struct Document {
    std::string id;
    std::string author_id;  // empty for unlabeled documents
    std::string bytes;      // one byte per character in the corpus encoding
    std::size_t char_count = 0;
};

/// Documents are kept sorted by (author_id, id) so every downstream iteration
/// order, including vocabulary id assignment, is fixed by the content alone.
struct Corpus {
    std::vector<Document> documents;
    std::map<std::string, std::vector<std::size_t>> authors;  // author -> document indices
    Encoding encoding = Encoding::latin1;

    std::size_t size() const { return documents.size(); }
    std::optional<std::size_t> find(std::string_view id) const;
    std::vector<std::string> author_ids() const;
    std::vector<std::size_t> all_indices() const;
};

struct LoadReport {
    std::vector<std::string> dropped_authors;
};

struct LoadedCorpus {
    Corpus corpus;
    LoadReport report;
};

/// Map UTF-8 text onto the single-byte encoding, transliterating characters the
/// code page lacks (or '?' when no fallback is known). Malformed UTF-8 bytes are
/// taken to already be in the target encoding and pass through unchanged.
std::string transcode(std::string_view text, Encoding encoding);

/// Inverse direction: single-byte text to UTF-8 through the code page.
std::string to_utf8(std::string_view bytes, Encoding encoding);

/// Read raw documents without any author filtering. dir_tree accepts
/// `<root>/<author>/<doc>.txt`; plain files directly under root become
/// unlabeled documents. jsonl rows may omit `author`.
std::vector<Document> load_documents(const std::filesystem::path& root, Layout layout,
                                     Encoding encoding);

/// Build a corpus from labeled documents, dropping single-document authors.
LoadedCorpus make_corpus(std::vector<Document> documents, Encoding encoding);

LoadedCorpus load_corpus(const std::filesystem::path& root, Layout layout, Encoding encoding);

/// Corpus restricted to the given document indices, re-sorted and re-indexed.
/// Author filtering is not reapplied.
Corpus subset(const Corpus& corpus, const std::vector<std::size_t>& indices);

struct FoldPlan {
    int k = 0;
    std::map<std::string, int> assignment;  // document id -> fold

    std::vector<std::size_t> test_indices(const Corpus& corpus, int fold) const;
    std::vector<std::size_t> train_indices(const Corpus& corpus, int fold) const;
};

/// Per-author seeded shuffle followed by round-robin assignment. The starting
/// fold of each author continues from where the previous author stopped, so
/// small authors do not all pile into the first folds.
FoldPlan stratified_folds(const Corpus& corpus, int k, std::uint64_t seed);

struct LooSplit {
    std::size_t heldout;
    std::vector<std::size_t> train;
};

/// Lazily enumerates leave-one-out splits in document order.
class LeaveOneOut {
public:
    explicit LeaveOneOut(const Corpus& corpus);

    class iterator {
    public:
        using value_type = LooSplit;
        using difference_type = std::ptrdiff_t;

        iterator() = default;
        iterator(const Corpus* corpus, std::size_t pos) : corpus_(corpus), pos_(pos) {}
        LooSplit operator*() const;
        iterator& operator++() {
            ++pos_;
            return *this;
        }
        iterator operator++(int) {
            auto copy = *this;
            ++pos_;
            return copy;
        }
        bool operator==(const iterator& other) const { return pos_ == other.pos_; }

    private:
        const Corpus* corpus_ = nullptr;
        std::size_t pos_ = 0;
    };

    iterator begin() const { return {corpus_, 0}; }
    iterator end() const { return {corpus_, corpus_->size()}; }
    std::size_t size() const { return corpus_->size(); }

private:
    const Corpus* corpus_;
};

LeaveOneOut leave_one_out(const Corpus& corpus);

enum class SplitRole { train, validation, test };

/// External fixed split: document id -> role.
using SplitManifest = std::map<std::string, SplitRole>;

SplitManifest load_split_manifest(const std::filesystem::path& path);
SplitManifest parse_split_manifest(std::string_view json_text);

/// Indices by role; documents absent from the manifest are ignored.
std::vector<std::size_t> indices_with_role(const Corpus& corpus, const SplitManifest& manifest,
                                           SplitRole role);

}  // namespace cp2d
