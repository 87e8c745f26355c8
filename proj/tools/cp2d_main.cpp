// cp2d command-line frontend: tokenize, fit, attribute, crossval, simulate, synth.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cp2d/corpus.hpp"
#include "cp2d/metrics.hpp"
#include "cp2d/pipeline.hpp"
#include "cp2d/profile_store.hpp"
#include "cp2d/tokenizer.hpp"
#include "cp2d/tuner.hpp"
#include "cp2d/umtsim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cp2d;

namespace {

enum ExitCode { k_ok = 0, k_config = 2, k_data = 3, k_domain = 4 };

struct CorpusArgs {
    std::string path;
    std::string layout = "dir_tree";
    std::string encoding = "latin1";
};

struct CommonArgs {
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::string optimizer = "newton";
};

void add_corpus_options(CLI::App* cmd, CorpusArgs& args, bool required = true) {
    auto* opt = cmd->add_option("--corpus", args.path, "Corpus root directory or jsonl manifest");
    if (required) opt->required();
    cmd->add_option("--layout", args.layout, "dir_tree | jsonl_manifest")->capture_default_str();
    cmd->add_option("--encoding", args.encoding, "latin1 | latin2")->capture_default_str();
}

void add_common_options(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--seed", args.seed, "Base random seed")->capture_default_str();
    cmd->add_option("--workers", args.workers, "Worker threads (0 = available parallelism)")->capture_default_str();
    cmd->add_option("--optimizer", args.optimizer, "newton | momentum")->capture_default_str();
}

std::string absolute(const std::string& path) {
    return path.empty() ? path : fs::absolute(path).lexically_normal().string();
}

json corpus_json(const CorpusArgs& args) {
    return {{"path", absolute(args.path)}, {"layout", args.layout}, {"encoding", args.encoding}};
}

OptimizerSettings optimizer_settings(const CommonArgs& args) {
    OptimizerSettings settings;
    settings.method = parse_optimizer_method(args.optimizer);
    return settings;
}

Corpus load_labeled(const CorpusArgs& args) {
    auto loaded = load_corpus(absolute(args.path), parse_layout(args.layout), parse_encoding(args.encoding));
    for (const auto& author : loaded.report.dropped_authors)
        std::cerr << "note: dropped author '" << author << "' (fewer than 2 documents)\n";
    return std::move(loaded.corpus);
}

void ensure_parent(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::ofstream open_out(const fs::path& path) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

void write_json(const fs::path& path, const json& value) {
    auto out = open_out(path);
    out << value.dump(2) << '\n';
}

// ---- tokenize -------------------------------------------------------------

struct TokenizeArgs {
    CorpusArgs corpus;
    CommonArgs common;
    std::string tokens = "osf:5";
    std::string out;
};

int run_tokenize(const TokenizeArgs& args) {
    const auto encoding = parse_encoding(args.corpus.encoding);
    const auto spec = TokenizerSpec::parse(args.tokens);
    auto docs = load_documents(absolute(args.corpus.path), parse_layout(args.corpus.layout), encoding);
    if (docs.empty()) throw DataError("empty corpus");
    Corpus corpus;
    corpus.encoding = encoding;
    corpus.documents = std::move(docs);
    const auto tokenized = tokenize_corpus(corpus, spec, args.common.workers);
    const fs::path root = absolute(args.out);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        auto out = open_out(root / (corpus.documents[i].id + ".tsv"));
        write_token_dump(out, tokenized.streams[i], tokenized.vocab);
    }
    write_json(root / "run.json", {{"command", "tokenize"},
                                   {"corpus", corpus_json(args.corpus)},
                                   {"tokens", spec.to_string()},
                                   {"documents", corpus.size()},
                                   {"vocabulary", tokenized.vocab.size()},
                                   {"seed", args.common.seed}});
    std::cout << "tokenized " << corpus.size() << " documents, " << tokenized.vocab.size() << " types -> "
              << root.string() << '\n';
    return k_ok;
}

// ---- fit ------------------------------------------------------------------

struct FitArgs {
    CorpusArgs corpus;
    CommonArgs common;
    std::string tokens = "osf:5";
    std::string out = "profiles.json";
};

int run_fit(const FitArgs& args) {
    const auto corpus = load_labeled(args.corpus);
    const auto spec = TokenizerSpec::parse(args.tokens);
    const auto tokenized = tokenize_corpus(corpus, spec, args.common.workers);
    const auto store = build_profile_store(corpus, tokenized, corpus.all_indices(), args.common.seed,
                                           optimizer_settings(args.common), args.common.workers);
    const fs::path out = absolute(args.out);
    ensure_parent(out);
    save_profile_store(store, out);

    std::ostringstream table;
    table << "author\talpha\ttheta\ttokens\ttypes\tconverged\titerations\tresets_used\n";
    for (std::size_t i = 0; i < store.profiles.size(); ++i) {
        const auto& p = store.profiles[i];
        const auto& f = store.fits[i];
        table << p.author_id << '\t' << p.params.alpha << '\t' << p.params.theta << '\t' << p.m() << '\t'
              << p.distinct() << '\t' << (f.converged ? "yes" : "no") << '\t' << f.iterations << '\t'
              << f.resets_used << '\n';
    }
    std::cout << table.str();
    auto tsv = open_out(fs::path(out.string() + ".tsv"));
    tsv << table.str();
    write_json(fs::path(out.string() + ".run.json"), {{"command", "fit"},
                                                      {"corpus", corpus_json(args.corpus)},
                                                      {"tokens", spec.to_string()},
                                                      {"optimizer", args.common.optimizer},
                                                      {"seed", args.common.seed}});
    return k_ok;
}

// ---- attribute --------------------------------------------------------------

struct AttributeArgs {
    CorpusArgs docs;
    CommonArgs common;
    std::string profiles;
    std::string p0 = "global";
    std::string fragment = "full";
    std::string criterion = "ml";
    double delta = 1.0;
    std::string out;
};

int run_attribute(const AttributeArgs& args) {
    const fs::path store_path = absolute(args.profiles);
    if (!fs::exists(store_path)) throw DataError("profile store not found: " + store_path.string());
    auto store = load_profile_store(store_path);
    if (store.profiles.empty()) throw DataError("profile store has no authors");
    const auto encoding = parse_encoding(args.docs.encoding);
    if (encoding != store.encoding)
        std::cerr << "note: documents are read as " << to_string(encoding) << ", profiles were built from "
                  << to_string(store.encoding) << '\n';

    HyperConfig config;
    config.tokenizer = store.tokenizer;
    config.p0 = parse_base_strategy(args.p0);
    config.fragment = FragmentLength::parse(args.fragment);
    config.criterion = parse_criterion(args.criterion);
    config.delta = args.delta;
    if (!(config.delta > 0.0)) throw ConfigError("--delta must be positive");

    const auto docs = load_documents(absolute(args.docs.path), parse_layout(args.docs.layout), encoding);
    if (docs.empty()) throw DataError("no documents to attribute");
    std::vector<TokenStream> streams;
    streams.reserve(docs.size());
    CountTable base_counts = store.base_counts;
    for (const auto& doc : docs) {
        streams.push_back(make_stream(tokens_for(doc.bytes, store.tokenizer, encoding), store.vocab));
        base_counts.merge(streams.back().counts);
    }
    const auto base = base_global(base_counts, store.vocab.size());
    bind_all(store.profiles, base);

    std::vector<AttributionResult> results(docs.size());
    parallel_for(docs.size(), args.common.workers, [&](std::size_t i) {
        results[i] = attribute_stream(docs[i].id, streams[i], store.profiles, base, config);
    });

    std::ofstream file;
    if (!args.out.empty()) file = open_out(absolute(args.out));
    std::ostream& out = args.out.empty() ? std::cout : file;
    for (std::size_t i = 0; i < results.size(); ++i) {
        auto row = to_json(results[i]);
        if (!docs[i].author_id.empty()) row["truth"] = docs[i].author_id;
        row["seed"] = store.seed;
        out << row.dump() << '\n';
    }
    if (!args.out.empty())
        write_json(fs::path(absolute(args.out) + ".run.json"), {{"command", "attribute"},
                                                                {"profiles", store_path.string()},
                                                                {"documents", corpus_json(args.docs)},
                                                                {"config", to_json(config)},
                                                                {"seed", store.seed}});
    return k_ok;
}

// ---- crossval ---------------------------------------------------------------

struct CrossvalArgs {
    CorpusArgs corpus;
    CommonArgs common;
    int folds = 10;
    std::vector<std::string> tokens;
    std::vector<std::string> p0;
    std::vector<std::string> fragments;
    std::vector<std::string> criteria;
    std::vector<double> deltas;
    std::string grid;
    std::string split;
    std::string scheme = "auto";
    int inner_folds = 9;
    std::optional<bool> refine;
    std::string out = "crossval";
};

SearchGrid grid_from_args(const CrossvalArgs& args, bool& fragment_fixed) {
    SearchGrid grid;
    if (!args.grid.empty()) {
        std::ifstream in(absolute(args.grid));
        if (!in) throw ConfigError("cannot read grid file " + args.grid);
        json root;
        try {
            in >> root;
        } catch (const json::exception& e) {
            throw ConfigError("grid file " + args.grid + ": " + e.what());
        }
        grid = search_grid_from_json(root);
    }
    if (!args.tokens.empty()) {
        grid.tokenizers.clear();
        for (const auto& t : args.tokens) grid.tokenizers.push_back(TokenizerSpec::parse(t));
    }
    if (!args.p0.empty()) {
        grid.strategies.clear();
        for (const auto& s : args.p0) grid.strategies.push_back(parse_base_strategy(s));
    }
    fragment_fixed = !args.fragments.empty();
    if (fragment_fixed) {
        grid.fragments.clear();
        for (const auto& f : args.fragments) grid.fragments.push_back(FragmentLength::parse(f));
    }
    if (!args.criteria.empty()) {
        grid.criteria.clear();
        for (const auto& c : args.criteria) grid.criteria.push_back(parse_criterion(c));
    }
    if (!args.deltas.empty()) grid.deltas = args.deltas;
    grid.validate();
    return grid;
}

int run_crossval(const CrossvalArgs& args) {
    const auto started = std::chrono::steady_clock::now();
    const auto corpus = load_labeled(args.corpus);
    bool fragment_fixed = false;
    TunerOptions options;
    options.grid = grid_from_args(args, fragment_fixed);
    options.scheme = parse_validation_scheme(args.scheme);
    options.folds = args.inner_folds;
    options.seed = args.common.seed;
    options.workers = args.common.workers;
    options.refine = args.refine.value_or(!fragment_fixed);
    options.optimizer = optimizer_settings(args.common);
    Tuner tuner(corpus, options);

    CrossValReport report;
    if (!args.split.empty()) {
        const auto manifest = load_split_manifest(absolute(args.split));
        auto train = indices_with_role(corpus, manifest, SplitRole::train);
        const auto validation = indices_with_role(corpus, manifest, SplitRole::validation);
        train.insert(train.end(), validation.begin(), validation.end());
        std::sort(train.begin(), train.end());
        const auto test = indices_with_role(corpus, manifest, SplitRole::test);
        if (train.empty() || test.empty()) throw DataError("split manifest needs train and test documents");
        report = collect({evaluate_split(tuner, train, test, 0)});
    } else {
        if (args.folds < 2) throw ConfigError("--folds must be at least 2");
        report = cross_validate(tuner, args.folds);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    const fs::path root = absolute(args.out);
    fs::create_directories(root);
    auto predictions = open_out(root / "predictions.jsonl");
    for (const auto& fold : report.folds) {
        for (std::size_t t = 0; t < fold.results.size(); ++t) {
            auto row = to_json(fold.results[t]);
            row["fold"] = fold.fold;
            row["truth"] = fold.truth[t];
            predictions << row.dump() << '\n';
        }
        if (!fold.search.trace.empty()) {
            auto search = to_json(fold.search);
            search["seed"] = args.common.seed;
            write_json(root / ("search_fold" + std::to_string(fold.fold) + ".json"), search);
        }
    }
    auto metrics_csv = open_out(root / "metrics.csv");
    write_metrics_csv(metrics_csv, report.metrics);

    double mean = 0.0;
    for (const auto& fold : report.folds) mean += fold.accuracy;
    if (!report.folds.empty()) mean /= static_cast<double>(report.folds.size());
    auto summary = to_json(report);
    summary["mean_fold_accuracy"] = mean;
    summary["seed"] = args.common.seed;
    summary["run"] = {{"command", "crossval"},
                      {"corpus", corpus_json(args.corpus)},
                      {"folds", args.folds},
                      {"split", absolute(args.split)},
                      {"scheme", args.scheme},
                      {"inner_folds", args.inner_folds},
                      {"refine", options.refine},
                      {"optimizer", args.common.optimizer},
                      {"grid", to_json(options.grid)}};
    write_json(root / "report.json", summary);

    for (const auto& fold : report.folds)
        std::printf("fold %d: accuracy %.4f (%zu documents) best %s\n", fold.fold, fold.accuracy,
                    fold.results.size(), to_json(fold.search.best).dump().c_str());
    std::printf("mean fold accuracy %.4f, pooled accuracy %.4f, macro F1 %.4f (%.1f s)\n", mean,
                report.metrics.accuracy, report.metrics.macro.f1, seconds);
    return k_ok;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string model = "pd";
    double alpha = 0.5;
    double theta = 10.0;
    double rho = 4.0;
    std::optional<double> rho_tilde;
    std::uint64_t nu = 2;
    double n0 = 10.0;
    std::uint64_t t_max = 100000;
    std::uint64_t stride = 1;
    std::uint64_t seed = 1;
    std::string out;
};

int run_simulate(const SimulateArgs& args) {
    GeneratedSequence seq;
    json params;
    if (args.model == "pd") {
        const AuthorParams p{args.alpha, args.theta};
        p.validate();
        seq = simulate_pd(p, args.t_max, args.seed);
        params = {{"alpha", args.alpha}, {"theta", args.theta}};
    } else if (args.model == "urn") {
        UrnParams p = exchangeable_urn(args.rho, args.nu, args.n0);
        if (args.rho_tilde) p.rho_tilde = *args.rho_tilde;
        p.validate();
        seq = simulate_umt(p, args.t_max, args.seed);
        params = {{"rho", p.rho}, {"rho_tilde", p.rho_tilde}, {"nu", p.nu}, {"n0", p.n0}};
    } else {
        throw ConfigError("unknown model '" + args.model + "' (expected pd|urn)");
    }
    if (args.stride == 0) throw ConfigError("--stride must be positive");
    std::ofstream file;
    if (!args.out.empty()) file = open_out(absolute(args.out));
    std::ostream& out = args.out.empty() ? std::cout : file;
    write_trace_csv(out, seq, args.stride);

    json run = {{"command", "simulate"}, {"model", args.model}, {"params", params},
                {"t_max", args.t_max}, {"seed", args.seed}, {"distinct", seq.distinct_trace.back()}};
    if (args.t_max >= 10000) run["heaps_exponent"] = heaps_exponent(seq.distinct_trace);
    if (!args.out.empty()) {
        write_json(fs::path(absolute(args.out) + ".run.json"), run);
        std::cerr << run.dump() << '\n';
    }
    return k_ok;
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
    SynthOptions options;
    std::string out = "synth.jsonl";
};

int run_synth(const SynthArgs& args) {
    const auto synth = synth_corpus(args.options);
    const fs::path out = absolute(args.out);
    auto file = open_out(out);
    write_corpus_jsonl(file, synth.corpus);
    json truth = json::object();
    for (const auto& [author, p] : synth.truth) truth[author] = {{"alpha", p.alpha}, {"theta", p.theta}};
    const auto& o = args.options;
    write_json(fs::path(out.string() + ".run.json"), {{"command", "synth"},
                                                      {"authors", o.n_authors},
                                                      {"docs_per_author", o.docs_per_author},
                                                      {"tokens_per_doc", o.tokens_per_doc},
                                                      {"vocabulary_per_author", o.vocabulary_per_author},
                                                      {"shared_fraction", o.shared_fraction},
                                                      {"zipf_exponent", o.zipf_exponent},
                                                      {"seed", o.seed},
                                                      {"truth", truth}});
    std::cout << "wrote " << synth.corpus.size() << " documents by " << synth.corpus.authors.size()
              << " authors -> " << out.string() << '\n';
    return k_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Authorship attribution with Poisson-Dirichlet author models"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI/TOML file with option values; command-line flags take precedence");

    TokenizeArgs tok;
    auto* tokenize = app.add_subcommand("tokenize", "Write per-document token dumps (id, count, token)");
    add_corpus_options(tokenize, tok.corpus);
    add_common_options(tokenize, tok.common);
    tokenize->add_option("--tokens", tok.tokens, "osf:N | lz77:W | lz77:inf | words")->capture_default_str();
    tokenize->add_option("--out", tok.out, "Output directory")->required();

    FitArgs fit;
    auto* fitcmd = app.add_subcommand("fit", "Fit per-author (alpha, theta) and save a profile store");
    add_corpus_options(fitcmd, fit.corpus);
    add_common_options(fitcmd, fit.common);
    fitcmd->add_option("--tokens", fit.tokens, "osf:N | lz77:W | lz77:inf | words")->capture_default_str();
    fitcmd->add_option("--out", fit.out, "Profile store path (JSON)")->capture_default_str();

    AttributeArgs attr;
    auto* attribute = app.add_subcommand("attribute", "Attribute documents against a profile store");
    attribute->add_option("--profiles", attr.profiles, "Profile store written by fit")->required();
    add_corpus_options(attribute, attr.docs);
    add_common_options(attribute, attr.common);
    attribute->add_option("--p0", attr.p0, "global | author")->capture_default_str();
    attribute->add_option("--fragment", attr.fragment, "Fragment length in tokens, or full")->capture_default_str();
    attribute->add_option("--criterion", attr.criterion, "ml | majority")->capture_default_str();
    attribute->add_option("--delta", attr.delta, "Multiplier on the base distribution")->capture_default_str();
    attribute->add_option("--out", attr.out, "Results JSONL (default stdout)");

    CrossvalArgs cv;
    auto* crossval = app.add_subcommand("crossval", "Stratified k-fold evaluation with inner tuning");
    add_corpus_options(crossval, cv.corpus);
    add_common_options(crossval, cv.common);
    crossval->add_option("--folds", cv.folds, "Outer folds")->capture_default_str();
    crossval->add_option("--tokens", cv.tokens, "Token kinds to search (comma separated)")->delimiter(',');
    crossval->add_option("--p0", cv.p0, "Base strategies to search: global, author")->delimiter(',');
    crossval->add_option("--fragment", cv.fragments, "Fragment lengths to search (int or full)")->delimiter(',');
    crossval->add_option("--criterion", cv.criteria, "Criteria to search: ml, majority")->delimiter(',');
    crossval->add_option("--delta", cv.deltas, "Delta grid (default 31 log-spaced values in [0.01, 10])")
        ->delimiter(',');
    crossval->add_option("--grid", cv.grid, "Search grid JSON file; flags override its entries");
    crossval->add_option("--split", cv.split, "Fixed split manifest {doc id: train|validation|test}");
    crossval->add_option("--scheme", cv.scheme, "Inner validation: auto | loo | kfold | single")
        ->capture_default_str();
    crossval->add_option("--inner-folds", cv.inner_folds, "Folds for kfold/single inner validation")
        ->capture_default_str();
    crossval->add_flag("--refine,!--no-refine", cv.refine,
                       "Second-stage fragment-length sweep (default: on unless --fragment is given)");
    crossval->add_option("--out", cv.out, "Output directory")->capture_default_str();

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate a PD process or urn with triggering");
    simulate->add_option("--model", sim.model, "pd | urn")->capture_default_str();
    simulate->add_option("--alpha", sim.alpha, "PD discount")->capture_default_str();
    simulate->add_option("--theta", sim.theta, "PD concentration")->capture_default_str();
    simulate->add_option("--rho", sim.rho, "Urn reinforcement")->capture_default_str();
    simulate->add_option("--rho-tilde", sim.rho_tilde, "Urn reinforcement of novel draws (default rho - nu - 1)");
    simulate->add_option("--nu", sim.nu, "Colours added on a novel draw, minus one")->capture_default_str();
    simulate->add_option("--n0", sim.n0, "Initial urn size")->capture_default_str();
    simulate->add_option("--t-max", sim.t_max, "Number of draws")->capture_default_str();
    simulate->add_option("--stride", sim.stride, "Write every stride-th step")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    simulate->add_option("--out", sim.out, "Trace CSV (default stdout)");

    SynthArgs syn;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus (jsonl)");
    synth->add_option("--authors", syn.options.n_authors, "Number of authors")->capture_default_str();
    synth->add_option("--docs", syn.options.docs_per_author, "Documents per author")->capture_default_str();
    synth->add_option("--tokens", syn.options.tokens_per_doc, "Tokens per document")->capture_default_str();
    synth->add_option("--vocab", syn.options.vocabulary_per_author, "Vocabulary per author")->capture_default_str();
    synth->add_option("--shared", syn.options.shared_fraction, "Shared vocabulary fraction")->capture_default_str();
    synth->add_option("--zipf", syn.options.zipf_exponent, "Zipf exponent of label weights")->capture_default_str();
    synth->add_option("--seed", syn.options.seed, "Random seed")->capture_default_str();
    synth->add_option("--out", syn.out, "Output jsonl path")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return k_config;
    }

    try {
        if (*tokenize) return run_tokenize(tok);
        if (*fitcmd) return run_fit(fit);
        if (*attribute) return run_attribute(attr);
        if (*crossval) return run_crossval(cv);
        if (*simulate) return run_simulate(sim);
        if (*synth) return run_synth(syn);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return k_config;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return k_data;
    } catch (const DomainError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return k_domain;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return k_data;
    }
    return k_config;
}
