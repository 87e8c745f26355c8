#include "cp2d/profile_store.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace cp2d {

std::vector<std::string> ProfileStore::author_ids() const {
    std::vector<std::string> ids;
    ids.reserve(profiles.size());
    for (const auto& p : profiles) ids.push_back(p.author_id);
    return ids;
}

namespace {

nlohmann::json counts_to_json(const CountTable& counts) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < counts.ids().size(); ++i) out.push_back({counts.ids()[i], counts.counts()[i]});
    return out;
}

CountTable counts_from_json(const nlohmann::json& rows, std::size_t vocab_size) {
    std::vector<std::pair<TypeId, std::uint64_t>> pairs;
    pairs.reserve(rows.size());
    for (const auto& row : rows) {
        const auto id = row.at(0).get<TypeId>();
        if (id >= vocab_size) throw DataError("profile store: type id " + std::to_string(id) + " outside vocabulary");
        pairs.emplace_back(id, row.at(1).get<std::uint64_t>());
    }
    return CountTable::from_pairs(std::move(pairs));
}

}  // namespace

nlohmann::json to_json(const ProfileStore& store) {
    nlohmann::json vocabulary = nlohmann::json::array();
    for (const auto& token : store.vocab.tokens()) vocabulary.push_back(to_utf8(token, store.encoding));
    nlohmann::json profiles = nlohmann::json::array();
    for (std::size_t i = 0; i < store.profiles.size(); ++i) {
        const auto& p = store.profiles[i];
        nlohmann::json row = {{"author", p.author_id},
                              {"alpha", p.params.alpha},
                              {"theta", p.params.theta},
                              {"normalizer", p.base_normalizer},
                              {"counts", counts_to_json(p.counts)}};
        if (i < store.fits.size()) {
            const auto& f = store.fits[i];
            row["fit"] = {{"converged", f.converged},
                          {"iterations", f.iterations},
                          {"resets_used", f.resets_used},
                          {"gradient_norm", f.final_gradient_norm}};
        }
        profiles.push_back(std::move(row));
    }
    return {{"format", "cp2d-profiles"},
            {"version", ProfileStore::k_version},
            {"tokenizer", store.tokenizer.to_string()},
            {"encoding", std::string(to_string(store.encoding))},
            {"seed", store.seed},
            {"vocabulary", std::move(vocabulary)},
            {"base_counts", counts_to_json(store.base_counts)},
            {"profiles", std::move(profiles)}};
}

ProfileStore profile_store_from_json(const nlohmann::json& root) {
    try {
        if (root.value("format", std::string{}) != "cp2d-profiles")
            throw DataError("not a cp2d profile store");
        const int version = root.at("version").get<int>();
        if (version != ProfileStore::k_version)
            throw DataError("unsupported profile store version " + std::to_string(version));
        ProfileStore store;
        store.tokenizer = TokenizerSpec::parse(root.at("tokenizer").get<std::string>());
        store.encoding = parse_encoding(root.at("encoding").get<std::string>());
        store.seed = root.value("seed", std::uint64_t{0});
        for (const auto& token : root.at("vocabulary")) {
            const auto bytes = transcode(token.get<std::string>(), store.encoding);
            const auto before = store.vocab.size();
            store.vocab.intern(bytes);
            if (store.vocab.size() == before) throw DataError("profile store: duplicate vocabulary entry");
        }
        store.base_counts = counts_from_json(root.at("base_counts"), store.vocab.size());
        for (const auto& row : root.at("profiles")) {
            AuthorProfile p;
            p.author_id = row.at("author").get<std::string>();
            p.params = {row.at("alpha").get<double>(), row.at("theta").get<double>()};
            p.params.validate();
            p.base_normalizer = row.value("normalizer", 0.0);
            p.counts = counts_from_json(row.at("counts"), store.vocab.size());
            if (p.counts.total() == 0) throw DataError("profile store: author '" + p.author_id + "' has no tokens");
            if (row.contains("fit")) {
                const auto& f = row["fit"];
                FitReport report;
                report.params = p.params;
                report.converged = f.value("converged", false);
                report.iterations = f.value("iterations", std::uint64_t{0});
                report.resets_used = f.value("resets_used", 0);
                report.final_gradient_norm = f.value("gradient_norm", 0.0);
                store.fits.push_back(report);
            }
            store.profiles.push_back(std::move(p));
        }
        if (!store.fits.empty() && store.fits.size() != store.profiles.size()) store.fits.clear();
        std::vector<std::size_t> order(store.profiles.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return store.profiles[a].author_id < store.profiles[b].author_id;
        });
        for (std::size_t i = 1; i < order.size(); ++i)
            if (store.profiles[order[i]].author_id == store.profiles[order[i - 1]].author_id)
                throw DataError("profile store: duplicate author '" + store.profiles[order[i]].author_id + "'");
        std::vector<AuthorProfile> profiles;
        std::vector<FitReport> fits;
        for (const auto i : order) {
            profiles.push_back(std::move(store.profiles[i]));
            if (!store.fits.empty()) fits.push_back(store.fits[i]);
        }
        store.profiles = std::move(profiles);
        store.fits = std::move(fits);
        return store;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("profile store: ") + e.what());
    }
}

void save_profile_store(const ProfileStore& store, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << to_json(store).dump() << '\n';
}

ProfileStore load_profile_store(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read profile store " + path.string());
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("profile store " + path.string() + ": " + e.what());
    }
    return profile_store_from_json(root);
}

}  // namespace cp2d
