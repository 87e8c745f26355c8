#include "cp2d/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace cp2d {

ValidationScheme parse_validation_scheme(std::string_view name) {
    if (name == "auto" || name == "automatic") return ValidationScheme::automatic;
    if (name == "loo") return ValidationScheme::loo;
    if (name == "kfold") return ValidationScheme::kfold;
    if (name == "single" || name == "single_fold") return ValidationScheme::single_fold;
    throw ConfigError("unknown validation scheme '" + std::string(name) + "' (expected auto|loo|kfold|single)");
}

std::string_view to_string(ValidationScheme scheme) {
    switch (scheme) {
        case ValidationScheme::automatic: return "auto";
        case ValidationScheme::loo: return "loo";
        case ValidationScheme::kfold: return "kfold";
        case ValidationScheme::single_fold: return "single";
    }
    return "auto";
}

ValidationScheme resolve_scheme(ValidationScheme scheme, std::size_t documents) {
    if (scheme != ValidationScheme::automatic) return scheme;
    if (documents < 1000) return ValidationScheme::loo;
    if (documents < 100000) return ValidationScheme::kfold;
    return ValidationScheme::single_fold;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi >= lo) || n == 0) throw ConfigError("log_spaced: need 0 < lo <= hi and n >= 1");
    if (n == 1) return {lo};
    std::vector<double> out(n);
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

void SearchGrid::validate() const {
    if (tokenizers.empty() || strategies.empty() || fragments.empty() || criteria.empty() || deltas.empty())
        throw ConfigError("search grid: every dimension needs at least one value");
    for (const double d : deltas)
        if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("search grid: delta values must be positive");
}

std::size_t SearchGrid::coarse_size() const {
    return tokenizers.size() * strategies.size() * fragments.size() * criteria.size() * deltas.size();
}

nlohmann::json to_json(const SearchGrid& grid) {
    nlohmann::json out;
    for (const auto& t : grid.tokenizers) out["tokenizers"].push_back(t.to_string());
    for (const auto s : grid.strategies) out["p0"].push_back(std::string(to_string(s)));
    for (const auto& f : grid.fragments) out["fragments"].push_back(f.to_string());
    for (const auto c : grid.criteria) out["criteria"].push_back(std::string(to_string(c)));
    out["deltas"] = grid.deltas;
    out["refine_fragments"] = nlohmann::json::array();
    for (const auto& f : grid.refine_fragments) out["refine_fragments"].push_back(f.to_string());
    return out;
}

namespace {

FragmentLength fragment_from_json(const nlohmann::json& value) {
    if (value.is_number_integer()) return FragmentLength::of(value.get<std::size_t>());
    return FragmentLength::parse(value.get<std::string>());
}

std::vector<FragmentLength> fragments_from_json(const nlohmann::json& values) {
    std::vector<FragmentLength> out;
    for (const auto& v : values) out.push_back(fragment_from_json(v));
    return out;
}

}  // namespace

SearchGrid search_grid_from_json(const nlohmann::json& root) {
    try {
        SearchGrid grid;
        if (root.contains("tokenizers")) {
            grid.tokenizers.clear();
            for (const auto& t : root["tokenizers"]) grid.tokenizers.push_back(TokenizerSpec::parse(t.get<std::string>()));
        }
        if (root.contains("p0")) {
            grid.strategies.clear();
            for (const auto& s : root["p0"]) grid.strategies.push_back(parse_base_strategy(s.get<std::string>()));
        }
        if (root.contains("fragments")) grid.fragments = fragments_from_json(root["fragments"]);
        if (root.contains("criteria")) {
            grid.criteria.clear();
            for (const auto& c : root["criteria"]) grid.criteria.push_back(parse_criterion(c.get<std::string>()));
        }
        if (root.contains("deltas")) {
            const auto& d = root["deltas"];
            if (d.is_object()) {
                grid.deltas = log_spaced(d.at("min").get<double>(), d.at("max").get<double>(),
                                         d.at("count").get<std::size_t>());
            } else {
                grid.deltas = d.get<std::vector<double>>();
            }
        }
        if (root.contains("refine_fragments")) grid.refine_fragments = fragments_from_json(root["refine_fragments"]);
        grid.validate();
        return grid;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("search grid: ") + e.what());
    }
}

namespace {

std::size_t argmax_by_id(const std::vector<double>& values, const std::vector<std::string>& ids) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < values.size(); ++a)
        if (values[a] > values[best] || (values[a] == values[best] && ids[a] < ids[best])) best = a;
    return best;
}

struct SweepScratch {
    std::vector<double> col_lp, col_new, totals, row;
    std::vector<std::uint64_t> votes;
};

// Adds 1 to correct[d] for every δ index d at which the document is attributed
// to its true author.
void sweep_doc(const ScoreGrid& grid, const std::vector<double>& shift, std::size_t truth, Criterion criterion,
               const std::vector<std::string>& ids, const std::vector<double>& log_deltas,
               std::uint64_t* correct, SweepScratch& s) {
    const std::size_t A = grid.authors;
    s.col_lp.assign(A, 0.0);
    s.col_new.assign(A, 0.0);
    for (std::size_t f = 0; f < grid.fragments; ++f)
        for (std::size_t a = 0; a < A; ++a) {
            s.col_lp[a] += grid.at(f, a);
            s.col_new[a] += static_cast<double>(grid.new_at(f, a));
        }
    s.totals.resize(A);
    s.row.resize(A);
    for (std::size_t d = 0; d < log_deltas.size(); ++d) {
        const double L = log_deltas[d];
        for (std::size_t a = 0; a < A; ++a)
            s.totals[a] = s.col_new[a] == 0.0 ? s.col_lp[a] : s.col_lp[a] + s.col_new[a] * (shift[a] + L);
        std::size_t chosen = 0;
        if (criterion == Criterion::ml || grid.fragments == 1) {
            chosen = argmax_by_id(s.totals, ids);
        } else {
            s.votes.assign(A, 0);
            for (std::size_t f = 0; f < grid.fragments; ++f) {
                for (std::size_t a = 0; a < A; ++a) {
                    const auto c = grid.new_at(f, a);
                    s.row[a] = c == 0 ? grid.at(f, a) : grid.at(f, a) + static_cast<double>(c) * (shift[a] + L);
                }
                ++s.votes[argmax_by_id(s.row, ids)];
            }
            for (std::size_t a = 1; a < A; ++a) {
                if (s.votes[a] != s.votes[chosen]) {
                    if (s.votes[a] > s.votes[chosen]) chosen = a;
                } else if (s.totals[a] != s.totals[chosen]) {
                    if (s.totals[a] > s.totals[chosen]) chosen = a;
                } else if (ids[a] < ids[chosen]) {
                    chosen = a;
                }
            }
        }
        correct[d] += chosen == truth;
    }
}

std::vector<double> logs_of(const std::vector<double>& deltas) {
    std::vector<double> out;
    out.reserve(deltas.size());
    for (const double d : deltas) out.push_back(std::log(d));
    return out;
}

// δ index preferred among equal counts: closest to 1 in log scale, then smaller.
bool delta_preferred(double a, double b) {
    const double la = std::abs(std::log(a));
    const double lb = std::abs(std::log(b));
    return la != lb ? la < lb : a < b;
}

}  // namespace

DeltaCurve delta_sweep(const std::vector<ValidationDoc>& docs, const std::vector<std::string>& author_ids,
                       const std::vector<double>& deltas, Criterion criterion, BaseStrategy strategy) {
    if (deltas.empty()) throw ConfigError("delta_sweep: empty delta grid");
    if (docs.empty()) throw std::invalid_argument("delta_sweep: no documents");
    const auto log_deltas = logs_of(deltas);
    for (const double d : deltas)
        if (!(d > 0.0)) throw DomainError("delta must be positive");
    std::vector<std::uint64_t> correct(deltas.size(), 0);
    SweepScratch scratch;
    for (const auto& doc : docs) {
        if (doc.grid.authors != author_ids.size() || doc.grid.fragments == 0)
            throw std::invalid_argument("delta_sweep: grid does not match author list");
        std::vector<double> shift(author_ids.size(), 0.0);
        if (strategy == BaseStrategy::author_excluded) {
            if (doc.normalizers.size() != author_ids.size())
                throw std::invalid_argument("delta_sweep: normalizers missing for author-excluded base");
            shift = doc.normalizers;
        }
        sweep_doc(doc.grid, shift, doc.truth, criterion, author_ids, log_deltas, correct.data(), scratch);
    }
    DeltaCurve curve;
    curve.accuracy.resize(deltas.size());
    for (std::size_t d = 0; d < deltas.size(); ++d) {
        curve.accuracy[d] = static_cast<double>(correct[d]) / static_cast<double>(docs.size());
        const auto b = curve.best_index;
        if (correct[d] > correct[b] || (correct[d] == correct[b] && delta_preferred(deltas[d], deltas[b])))
            curve.best_index = d;
    }
    curve.best_delta = deltas[curve.best_index];
    return curve;
}

Tuner::Tuner(const Corpus& corpus, TunerOptions options) : corpus_(corpus), options_(std::move(options)) {
    options_.grid.validate();
    if (options_.folds < 2) throw ConfigError("validation folds must be at least 2");
}

const TokenizedCorpus& Tuner::tokenized(const TokenizerSpec& spec) {
    auto& slot = cache_[spec.to_string()];
    if (!slot) slot = std::make_unique<TokenizedCorpus>(tokenize_corpus(corpus_, spec, options_.workers));
    return *slot;
}

std::vector<TraceEntry> Tuner::evaluate(const std::vector<std::size_t>& train, const TokenizerSpec& spec,
                                        const std::vector<FragmentLength>& fragments,
                                        const std::vector<BaseStrategy>& strategies,
                                        const std::vector<Criterion>& criteria, const std::string& stage) {
    if (train.empty()) throw DataError("tuning needs at least one training document");
    const auto& tc = tokenized(spec);
    const auto scheme = resolve_scheme(options_.scheme, train.size());

    // Authors of the training split, sorted by id.
    std::map<std::string, std::vector<std::size_t>> by_author;
    for (const auto i : train) by_author[corpus_.documents.at(i).author_id].push_back(i);
    std::vector<std::string> ids;
    std::vector<std::size_t> author_of(corpus_.size(), 0);
    for (const auto& [author, docs] : by_author) {
        for (const auto i : docs) author_of[i] = ids.size();
        ids.push_back(author);
    }
    const std::size_t A = ids.size();

    std::vector<std::vector<std::size_t>> units;
    if (scheme == ValidationScheme::loo) {
        for (const auto i : train) units.push_back({i});
    } else {
        const auto inner = subset(corpus_, train);
        const auto plan = stratified_folds(inner, options_.folds, derive_seed(options_.seed, 1));
        units.resize(static_cast<std::size_t>(options_.folds));
        for (const auto i : train) units[static_cast<std::size_t>(plan.assignment.at(corpus_.documents[i].id))].push_back(i);
        std::erase_if(units, [](const auto& u) { return u.empty(); });
        if (scheme == ValidationScheme::single_fold) units.resize(1);
    }

    const auto base = base_from_documents(tc, train);
    auto full = fit_profiles(corpus_, tc, train, options_.optimizer, options_.workers);
    bind_all(full.profiles, base);
    const auto log_deltas = logs_of(options_.grid.deltas);

    const std::size_t D = log_deltas.size();
    const std::size_t S = strategies.size();
    const std::size_t C = criteria.size();
    const std::size_t cells = fragments.size() * S * C;
    std::vector<std::vector<std::uint64_t>> unit_correct(units.size());

    parallel_for(units.size(), options_.workers, [&](std::size_t u) {
        const auto& heldout = units[u];
        std::map<std::size_t, CountTable> removed;
        for (const auto i : heldout) removed[author_of[i]].merge(tc.streams[i].counts);

        std::vector<const AuthorProfile*> view(A);
        std::deque<AuthorProfile> refits;
        for (std::size_t a = 0; a < A; ++a) {
            const auto it = removed.find(a);
            if (it == removed.end()) {
                view[a] = &full.profiles[a];
                continue;
            }
            AuthorProfile p;
            p.author_id = ids[a];
            p.counts = full.profiles[a].counts;
            p.counts.subtract(it->second);
            if (p.counts.total() == 0) {
                view[a] = nullptr;  // every training text of this author is held out
                continue;
            }
            p.params = fit_author(p.counts, options_.optimizer).params;
            bind_base(p, base);
            refits.push_back(std::move(p));
            view[a] = &refits.back();
        }

        auto& correct = unit_correct[u];
        correct.assign(cells * D, 0);
        SweepScratch scratch;
        std::vector<double> shift(A);
        for (const auto i : heldout) {
            const auto& stream = tc.streams[i];
            const std::size_t truth = author_of[i];
            for (std::size_t fi = 0; fi < fragments.size(); ++fi) {
                ScoreGrid grid;
                if (stream.sequence.empty()) {
                    grid.fragments = 1;
                    grid.authors = A;
                    grid.log_prob.assign(A, 0.0);
                    grid.new_types.assign(A, 0);
                } else {
                    const auto frags = fragment(stream, fragments[fi]);
                    grid.fragments = frags.size();
                    grid.authors = A;
                    grid.log_prob.assign(frags.size() * A, k_neg_inf);
                    grid.new_types.assign(frags.size() * A, 0);
                    for (std::size_t f = 0; f < frags.size(); ++f)
                        for (std::size_t a = 0; a < A; ++a) {
                            if (!view[a]) continue;
                            const auto score = score_text(*view[a], frags[f].counts, base);
                            grid.log_prob[f * A + a] = score.log_prob;
                            grid.new_types[f * A + a] = score.new_types;
                        }
                }
                for (std::size_t si = 0; si < S; ++si) {
                    for (std::size_t a = 0; a < A; ++a)
                        shift[a] = strategies[si] == BaseStrategy::author_excluded && view[a]
                                       ? view[a]->base_normalizer
                                       : 0.0;
                    for (std::size_t ci = 0; ci < C; ++ci) {
                        const std::size_t cell = (fi * S + si) * C + ci;
                        sweep_doc(grid, shift, truth, criteria[ci], ids, log_deltas, &correct[cell * D], scratch);
                    }
                }
            }
        }
    });

    std::uint64_t total = 0;
    for (const auto& u : units) total += u.size();
    std::vector<TraceEntry> trace;
    for (std::size_t fi = 0; fi < fragments.size(); ++fi)
        for (std::size_t si = 0; si < S; ++si)
            for (std::size_t ci = 0; ci < C; ++ci) {
                TraceEntry entry;
                entry.stage = stage;
                entry.tokenizer = spec;
                entry.p0 = strategies[si];
                entry.fragment = fragments[fi];
                entry.criterion = criteria[ci];
                entry.total = total;
                entry.correct.assign(D, 0);
                const std::size_t cell = (fi * S + si) * C + ci;
                for (const auto& uc : unit_correct)
                    for (std::size_t d = 0; d < D; ++d) entry.correct[d] += uc[cell * D + d];
                trace.push_back(std::move(entry));
            }
    return trace;
}

namespace {

template <typename T>
std::size_t index_in(const std::vector<T>& values, const T& value) {
    const auto it = std::find(values.begin(), values.end(), value);
    return static_cast<std::size_t>(it - values.begin());
}

struct Candidate {
    const TraceEntry* entry;
    std::size_t delta_index;
};

}  // namespace

SearchReport Tuner::summarize(std::vector<TraceEntry> trace, std::size_t train_size) const {
    const auto& grid = options_.grid;
    const auto better = [&](const Candidate& x, const Candidate& y) {
        const auto cx = x.entry->correct[x.delta_index];
        const auto cy = y.entry->correct[y.delta_index];
        if (cx != cy) return cx > cy;
        const auto& fx = x.entry->fragment;
        const auto& fy = y.entry->fragment;
        if (fx != fy) {
            if (fx.is_full() || fy.is_full()) return fx.is_full();
            return *fx.tokens > *fy.tokens;
        }
        const auto sx = index_in(grid.strategies, x.entry->p0);
        const auto sy = index_in(grid.strategies, y.entry->p0);
        if (sx != sy) return sx < sy;
        const auto tx = index_in(grid.tokenizers, x.entry->tokenizer);
        const auto ty = index_in(grid.tokenizers, y.entry->tokenizer);
        if (tx != ty) return tx < ty;
        if (x.entry->criterion != y.entry->criterion) return x.entry->criterion == Criterion::ml;
        return delta_preferred(grid.deltas[x.delta_index], grid.deltas[y.delta_index]);
    };

    std::vector<Candidate> all;
    for (const auto& e : trace)
        for (std::size_t d = 0; d < e.correct.size(); ++d) all.push_back({&e, d});
    if (all.empty()) throw ConfigError("search grid is empty");
    std::stable_sort(all.begin(), all.end(), better);

    const auto config_of = [&](const Candidate& c) {
        return HyperConfig{c.entry->tokenizer, c.entry->p0, c.entry->fragment, c.entry->criterion,
                           grid.deltas[c.delta_index]};
    };
    SearchReport report;
    report.best = config_of(all.front());
    const auto best_correct = all.front().entry->correct[all.front().delta_index];
    report.validated = all.front().entry->total;
    report.accuracy = report.validated ? static_cast<double>(best_correct) / static_cast<double>(report.validated) : 0.0;
    report.scheme = resolve_scheme(options_.scheme, train_size);
    report.deltas = grid.deltas;
    for (const auto& c : all) {
        if (c.entry->correct[c.delta_index] != best_correct) break;
        report.ties.push_back(config_of(c));
    }
    report.trace = std::move(trace);
    return report;
}

SearchReport Tuner::coarse_search(const std::vector<std::size_t>& train) {
    const auto& grid = options_.grid;
    std::vector<TraceEntry> trace;
    for (const auto& spec : grid.tokenizers) {
        auto part = evaluate(train, spec, grid.fragments, grid.strategies, grid.criteria, "coarse");
        trace.insert(trace.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return summarize(std::move(trace), train.size());
}

SearchReport Tuner::refine_fragment_length(const std::vector<std::size_t>& train, const HyperConfig& fixed) {
    const auto& fragments = options_.grid.refine_fragments.empty() ? options_.grid.fragments
                                                                   : options_.grid.refine_fragments;
    auto trace = evaluate(train, fixed.tokenizer, fragments, {fixed.p0}, {fixed.criterion}, "refine");
    return summarize(std::move(trace), train.size());
}

SearchReport Tuner::search(const std::vector<std::size_t>& train) {
    auto coarse = coarse_search(train);
    if (!options_.refine || options_.grid.refine_fragments.empty()) return coarse;
    auto refined = refine_fragment_length(train, coarse.best);
    std::vector<TraceEntry> trace = std::move(coarse.trace);
    trace.insert(trace.end(), std::make_move_iterator(refined.trace.begin()),
                 std::make_move_iterator(refined.trace.end()));
    refined.trace = std::move(trace);
    return refined;
}

nlohmann::json to_json(const SearchReport& report) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& e : report.trace) {
        std::vector<double> acc;
        std::size_t best = 0;
        for (std::size_t d = 0; d < e.correct.size(); ++d) {
            acc.push_back(e.total ? static_cast<double>(e.correct[d]) / static_cast<double>(e.total) : 0.0);
            if (e.correct[d] > e.correct[best] ||
                (e.correct[d] == e.correct[best] && delta_preferred(report.deltas[d], report.deltas[best])))
                best = d;
        }
        trace.push_back({{"stage", e.stage},
                         {"tokenizer", e.tokenizer.to_string()},
                         {"p0", std::string(to_string(e.p0))},
                         {"fragment", e.fragment.to_string()},
                         {"criterion", std::string(to_string(e.criterion))},
                         {"accuracy", acc},
                         {"best_delta", report.deltas.empty() ? 1.0 : report.deltas[best]},
                         {"best_accuracy", acc.empty() ? 0.0 : acc[best]}});
    }
    nlohmann::json ties = nlohmann::json::array();
    for (const auto& t : report.ties) ties.push_back(to_json(t));
    return {{"best", to_json(report.best)},
            {"accuracy", report.accuracy},
            {"scheme", std::string(to_string(report.scheme))},
            {"validated", report.validated},
            {"deltas", report.deltas},
            {"ties", ties},
            {"trace", trace}};
}

namespace {

bool single_point(const TunerOptions& options) {
    const auto& g = options.grid;
    return g.coarse_size() == 1 && (!options.refine || g.refine_fragments.empty());
}

}  // namespace

FoldOutcome evaluate_split(Tuner& tuner, const std::vector<std::size_t>& train,
                           const std::vector<std::size_t>& test, int fold) {
    FoldOutcome outcome;
    outcome.fold = fold;
    const auto& options = tuner.options();
    if (single_point(options)) {
        const auto& g = options.grid;
        outcome.search.best = {g.tokenizers.front(), g.strategies.front(), g.fragments.front(), g.criteria.front(),
                               g.deltas.front()};
        outcome.search.deltas = g.deltas;
    } else {
        outcome.search = tuner.search(train);
    }
    const auto& config = outcome.search.best;
    outcome.results = attribute_documents(tuner.corpus(), tuner.tokenized(config.tokenizer), train, test, config,
                                          options.optimizer, options.workers);
    std::uint64_t correct = 0;
    for (std::size_t t = 0; t < test.size(); ++t) {
        outcome.truth.push_back(tuner.corpus().documents[test[t]].author_id);
        correct += outcome.truth.back() == outcome.results[t].chosen;
    }
    outcome.accuracy = test.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(test.size());
    return outcome;
}

CrossValReport cross_validate(Tuner& tuner, int k) {
    const auto& corpus = tuner.corpus();
    const auto plan = stratified_folds(corpus, k, derive_seed(tuner.options().seed, 0));
    std::vector<FoldOutcome> folds;
    for (int f = 0; f < k; ++f) {
        const auto test = plan.test_indices(corpus, f);
        if (test.empty()) continue;
        folds.push_back(evaluate_split(tuner, plan.train_indices(corpus, f), test, f));
    }
    return collect(std::move(folds));
}

CrossValReport collect(std::vector<FoldOutcome> folds) {
    CrossValReport report;
    for (const auto& fold : folds)
        for (std::size_t t = 0; t < fold.results.size(); ++t)
            report.predictions.push_back({fold.truth[t], fold.results[t].chosen});
    report.folds = std::move(folds);
    if (!report.predictions.empty()) report.metrics = evaluate(report.predictions);
    return report;
}

nlohmann::json to_json(const CrossValReport& report) {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : report.folds)
        folds.push_back({{"fold", f.fold},
                         {"best", to_json(f.search.best)},
                         {"validation_accuracy", f.search.accuracy},
                         {"test_documents", f.results.size()},
                         {"test_accuracy", f.accuracy}});
    return {{"folds", folds}, {"metrics", metrics_summary(report.metrics)}};
}

}  // namespace cp2d
