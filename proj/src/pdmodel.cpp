#include "cp2d/pdmodel.hpp"

#include <cmath>
#include <string>

#include "cp2d/special.hpp"

namespace cp2d {

void AuthorParams::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("alpha must lie in (0,1), got " + std::to_string(alpha));
    if (!(theta + alpha > 0.0))
        throw DomainError("theta must exceed -alpha, got " + std::to_string(theta));
}

BaseStrategy parse_base_strategy(std::string_view name) {
    if (name == "global") return BaseStrategy::global;
    if (name == "author" || name == "author_excluded") return BaseStrategy::author_excluded;
    throw ConfigError("unknown P0 strategy '" + std::string(name) + "' (expected global|author)");
}

std::string_view to_string(BaseStrategy strategy) {
    return strategy == BaseStrategy::global ? "global" : "author";
}

PdState::PdState(const CountTable& counts) {
    const auto& ids = counts.ids();
    const auto& c = counts.counts();
    counts_.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) counts_.emplace(ids[i], c[i]);
    t_ = counts.total();
}

void PdState::push(TypeId id) {
    ++counts_[id];
    ++t_;
}

std::uint64_t PdState::count_of(TypeId id) const {
    const auto it = counts_.find(id);
    return it == counts_.end() ? 0 : it->second;
}

double pd_log_new_mass(const AuthorParams& params, const PdState& state) {
    const double t = static_cast<double>(state.t());
    const double d = static_cast<double>(state.distinct());
    return std::log(params.theta + params.alpha * d) - std::log(params.theta + t);
}

double pd_step(const AuthorParams& params, const PdState& state, TypeId token,
               const BaseDistribution& base) {
    const std::uint64_t seen = state.count_of(token);
    const double t = static_cast<double>(state.t());
    if (seen > 0)
        return std::log(static_cast<double>(seen) - params.alpha) - std::log(params.theta + t);
    return pd_log_new_mass(params, state) + std::log(base.delta) + base.log_new(token);
}

double partition_log_likelihood(const AuthorParams& params, const MultiplicitySpectrum& spectrum) {
    const std::uint64_t k = spectrum.distinct();
    const std::uint64_t n = spectrum.total();
    if (k == 0) return 0.0;
    double value = log_pochhammer_inc(params.theta + params.alpha, params.alpha, k - 1) -
                   log_pochhammer(params.theta + 1.0, n - 1);
    for (const auto& [mult, count] : spectrum.r)
        value += static_cast<double>(count) * log_pochhammer(1.0 - params.alpha, mult - 1);
    return value;
}

SequenceLogProb sequence_log_prob(const AuthorParams& params, const CountTable& counts,
                                  const BaseDistribution& base) {
    SequenceLogProb out;
    if (counts.total() == 0) throw std::invalid_argument("sequence_log_prob: empty sequence");
    const std::uint64_t k = counts.distinct();
    const std::uint64_t n = counts.total();
    out.partition = log_pochhammer_inc(params.theta + params.alpha, params.alpha, k - 1) -
                    log_pochhammer(params.theta + 1.0, n - 1);
    const auto& ids = counts.ids();
    const auto& c = counts.counts();
    for (std::size_t j = 0; j < ids.size(); ++j) {
        out.partition += log_pochhammer(1.0 - params.alpha, c[j] - 1);
        out.base_terms += std::log(base.delta) + base.log_new(ids[j]);
    }
    return out;
}

TextScore score_text(const AuthorProfile& profile, const CountTable& text,
                     const BaseDistribution& base) {
    if (text.total() == 0) throw std::invalid_argument("score_text: empty text");
    const double alpha = profile.params.alpha;
    const double theta = profile.params.theta;
    const auto& ids = text.ids();
    const auto& counts = text.counts();

    TextScore out;
    double q_sum = 0.0;
    for (std::size_t j = 0; j < ids.size(); ++j) {
        const std::uint64_t in_author = profile.counts.count_of(ids[j]);
        if (in_author > 0) {
            q_sum += log_pochhammer(static_cast<double>(in_author) - alpha, counts[j]);
        } else {
            ++out.new_types;
            q_sum += log_pochhammer(1.0 - alpha, counts[j] - 1) + base.log_new(ids[j]);
        }
    }
    const double d_author = static_cast<double>(profile.distinct());
    out.log_prob = log_pochhammer_inc(theta + alpha * d_author, alpha, out.new_types) -
                   log_pochhammer(theta + static_cast<double>(profile.m()), text.total()) + q_sum;
    if (base.delta != 1.0) out.log_prob = apply_delta(out.log_prob, out.new_types, base.delta);
    return out;
}

double apply_delta(double logp_at_delta1, std::uint64_t new_types, double delta) {
    if (!(delta > 0.0)) throw DomainError("delta must be positive");
    if (new_types == 0) return logp_at_delta1;
    return logp_at_delta1 + static_cast<double>(new_types) * std::log(delta);
}

BaseDistribution base_global(std::vector<std::uint64_t> counts) {
    std::uint64_t total = 0;
    for (const auto c : counts) total += c;
    if (total == 0) throw DataError("cannot build a base distribution from an empty corpus");
    std::vector<double> logp(counts.size());
    const double log_total = std::log(static_cast<double>(total));
    for (std::size_t i = 0; i < counts.size(); ++i)
        logp[i] = counts[i] == 0 ? k_neg_inf : std::log(static_cast<double>(counts[i])) - log_total;
    BaseDistribution base;
    base.logp0 = std::make_shared<const std::vector<double>>(std::move(logp));
    base.counts = std::make_shared<const std::vector<std::uint64_t>>(std::move(counts));
    base.total = total;
    return base;
}

BaseDistribution base_global(const CountTable& counts, std::size_t vocabulary_size) {
    std::vector<std::uint64_t> dense(vocabulary_size, 0);
    const auto& ids = counts.ids();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= vocabulary_size) throw std::out_of_range("base_global: type id beyond vocabulary");
        dense[ids[i]] = counts.counts()[i];
    }
    return base_global(std::move(dense));
}

BaseDistribution base_from_probabilities(const std::vector<double>& p0) {
    double sum = 0.0;
    std::vector<double> logp(p0.size());
    for (std::size_t i = 0; i < p0.size(); ++i) {
        if (p0[i] < 0.0) throw DomainError("base probabilities must be non-negative");
        sum += p0[i];
        logp[i] = p0[i] == 0.0 ? k_neg_inf : std::log(p0[i]);
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("base probabilities must sum to 1");
    BaseDistribution base;
    base.logp0 = std::make_shared<const std::vector<double>>(std::move(logp));
    return base;
}

BaseDistribution base_author_excluded(const BaseDistribution& global, const AuthorProfile& profile,
                                      bool* fallback) {
    BaseDistribution out = global;
    out.strategy = BaseStrategy::author_excluded;
    out.log_normalizer = 0.0;
    bool degenerate = false;
    const auto& ids = profile.counts.ids();
    if (global.counts) {
        std::uint64_t covered = 0;
        for (const auto id : ids)
            if (id < global.counts->size()) covered += (*global.counts)[id];
        const std::uint64_t remaining = global.total - covered;
        if (remaining == 0) degenerate = true;
        else out.log_normalizer = std::log(static_cast<double>(global.total)) -
                                  std::log(static_cast<double>(remaining));
    } else {
        double covered = 0.0;
        for (const auto id : ids) covered += std::exp(global.log_p0(id));
        if (covered >= 1.0 - 1e-15) degenerate = true;
        else out.log_normalizer = -std::log1p(-covered);
    }
    if (fallback) *fallback = degenerate;
    if (degenerate) {
        out = global;
        out.strategy = BaseStrategy::global;
        out.log_normalizer = 0.0;
    }
    return out;
}

void bind_base(AuthorProfile& profile, const BaseDistribution& global) {
    bool fallback = false;
    const auto excluded = base_author_excluded(global, profile, &fallback);
    profile.base_normalizer = excluded.log_normalizer;
    profile.normalizer_fallback = fallback;
}

BaseDistribution base_for(const BaseDistribution& global, const AuthorProfile& profile,
                          BaseStrategy strategy) {
    BaseDistribution out = global;
    out.strategy = strategy;
    out.log_normalizer = strategy == BaseStrategy::author_excluded ? profile.base_normalizer : 0.0;
    return out;
}

HistoryBase::HistoryBase(const BaseDistribution& global)
    : global_(global), seen_(global.vocabulary_size(), false) {}

double HistoryBase::log_prob(TypeId id) const {
    if (id < seen_.size() && seen_[id]) return k_neg_inf;
    if (seen_count_ == 0) return global_.log_p0(id);
    if (seen_mass_ >= 1.0 - 1e-15) throw DomainError("history base: seen types cover all base mass");
    return global_.log_p0(id) - std::log1p(-seen_mass_);
}

void HistoryBase::mark_seen(TypeId id) {
    if (id >= seen_.size() || seen_[id]) return;
    seen_[id] = true;
    ++seen_count_;
    seen_mass_ += std::exp(global_.log_p0(id));
}

}  // namespace cp2d
