#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "cp2d/metrics.hpp"
#include "cp2d/pipeline.hpp"

namespace cp2d {

enum class ValidationScheme { automatic, loo, kfold, single_fold };

ValidationScheme parse_validation_scheme(std::string_view name);
std::string_view to_string(ValidationScheme scheme);

/// automatic: leave-one-out below 1000 documents, k-fold below 100000,
/// a single held-out fold above that.
ValidationScheme resolve_scheme(ValidationScheme scheme, std::size_t documents);

/// n points evenly spaced in log between lo and hi inclusive.
std::vector<double> log_spaced(double lo, double hi, std::size_t n);

struct SearchGrid {
    std::vector<TokenizerSpec> tokenizers{TokenizerSpec::osf(5), TokenizerSpec::lz77(), TokenizerSpec::words()};
    std::vector<BaseStrategy> strategies{BaseStrategy::author_excluded, BaseStrategy::global};
    std::vector<FragmentLength> fragments{FragmentLength::full(), FragmentLength::of(1000), FragmentLength::of(100),
                                          FragmentLength::of(10)};
    std::vector<Criterion> criteria{Criterion::ml, Criterion::majority};
    std::vector<double> deltas = log_spaced(1e-2, 1e1, 31);
    std::vector<FragmentLength> refine_fragments{
        FragmentLength::of(1),    FragmentLength::of(3),    FragmentLength::of(10),    FragmentLength::of(32),
        FragmentLength::of(100),  FragmentLength::of(316),  FragmentLength::of(1000),  FragmentLength::of(3162),
        FragmentLength::of(10000), FragmentLength::full()};

    void validate() const;
    std::size_t coarse_size() const;
};

nlohmann::json to_json(const SearchGrid& grid);
/// Missing keys keep their defaults. Keys: tokenizers, p0, fragments,
/// criteria, deltas (list or {min, max, count}), refine_fragments.
SearchGrid search_grid_from_json(const nlohmann::json& root);

struct TunerOptions {
    SearchGrid grid;
    ValidationScheme scheme = ValidationScheme::automatic;
    int folds = 9;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    bool refine = true;
    OptimizerSettings optimizer;
};

/// Validation accuracy of one (tokenizer, p0, fragment, criterion) cell over the δ grid.
struct TraceEntry {
    std::string stage;  // "coarse" | "refine"
    TokenizerSpec tokenizer;
    BaseStrategy p0 = BaseStrategy::global;
    FragmentLength fragment;
    Criterion criterion = Criterion::ml;
    std::vector<std::uint64_t> correct;  // per δ
    std::uint64_t total = 0;
};

struct SearchReport {
    HyperConfig best;
    double accuracy = 0.0;
    ValidationScheme scheme = ValidationScheme::automatic;
    std::uint64_t validated = 0;  // held-out documents per cell
    std::vector<double> deltas;
    std::vector<TraceEntry> trace;
    std::vector<HyperConfig> ties;  // every configuration reaching the maximum
};

nlohmann::json to_json(const SearchReport& report);

/// A held-out document's δ = 1, global-base score grid.
struct ValidationDoc {
    ScoreGrid grid;
    std::vector<double> normalizers;  // per author, log 1/P(A^C)
    std::size_t truth = 0;            // author column
};

struct DeltaCurve {
    std::vector<double> accuracy;  // per δ
    std::size_t best_index = 0;
    double best_delta = 1.0;
};

/// Accuracy at every δ from grids scored once at δ = 1. Strategy and δ act on
/// an entry only through its new-type count c, as c·(log δ + normalizer).
/// Ties between δ values go to the one closest to 1 in log scale.
DeltaCurve delta_sweep(const std::vector<ValidationDoc>& docs, const std::vector<std::string>& author_ids,
                       const std::vector<double>& deltas, Criterion criterion,
                       BaseStrategy strategy = BaseStrategy::global);

class Tuner {
public:
    Tuner(const Corpus& corpus, TunerOptions options);

    /// Grid search over every coarse combination, validated inside `train`.
    SearchReport coarse_search(const std::vector<std::size_t>& train);
    /// Sweep the refine fragment lengths and δ with the rest of `fixed` held.
    SearchReport refine_fragment_length(const std::vector<std::size_t>& train, const HyperConfig& fixed);
    /// Coarse search followed by refinement (when enabled); the trace holds both stages.
    SearchReport search(const std::vector<std::size_t>& train);

    const TokenizedCorpus& tokenized(const TokenizerSpec& spec);
    const TunerOptions& options() const { return options_; }
    const Corpus& corpus() const { return corpus_; }

private:
    struct Cell;
    std::vector<TraceEntry> evaluate(const std::vector<std::size_t>& train, const TokenizerSpec& spec,
                                     const std::vector<FragmentLength>& fragments,
                                     const std::vector<BaseStrategy>& strategies,
                                     const std::vector<Criterion>& criteria, const std::string& stage);
    SearchReport summarize(std::vector<TraceEntry> trace, std::size_t train_size) const;

    const Corpus& corpus_;
    TunerOptions options_;
    std::map<std::string, std::unique_ptr<TokenizedCorpus>> cache_;
};

struct FoldOutcome {
    int fold = 0;
    SearchReport search;
    std::vector<AttributionResult> results;
    std::vector<std::string> truth;  // parallel to results
    double accuracy = 0.0;
};

struct CrossValReport {
    std::vector<FoldOutcome> folds;
    std::vector<Prediction> predictions;
    MetricsReport metrics;
};

/// Tune on `train` (skipped when the grid has a single point) and attribute `test`.
FoldOutcome evaluate_split(Tuner& tuner, const std::vector<std::size_t>& train,
                           const std::vector<std::size_t>& test, int fold = 0);

/// Stratified k-fold outer loop with inner tuning on each training split.
CrossValReport cross_validate(Tuner& tuner, int k);

/// Pool fold outcomes into predictions and metrics.
CrossValReport collect(std::vector<FoldOutcome> folds);

nlohmann::json to_json(const CrossValReport& report);

}  // namespace cp2d
