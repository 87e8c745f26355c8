#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cp2d/special.hpp"
#include "cp2d/umtsim.hpp"
#include "support.hpp"

using namespace cp2d;

namespace {

// E[D_n] for the PD process with θ > 0.
double expected_distinct(double alpha, double theta, std::uint64_t n) {
    return theta / alpha *
           std::expm1(log_pochhammer(theta + alpha, n) - log_pochhammer(theta, n));
}

double mean_distinct(const std::function<GeneratedSequence(std::uint64_t)>& run, int reps) {
    double sum = 0;
    for (int r = 0; r < reps; ++r) sum += static_cast<double>(run(r + 1).distinct_trace.back());
    return sum / reps;
}

}  // namespace

TEST_CASE("exchangeable parameter mapping") {
    const auto a = exchangeable_params(2.0, 1, 4.0);
    CHECK(a.alpha == doctest::Approx(0.5));
    CHECK(a.theta == doctest::Approx(2.0));
    const auto b = exchangeable_params(10.0, 7, 100.0);
    CHECK(b.alpha == doctest::Approx(0.7));
    CHECK(b.theta == doctest::Approx(10.0));
    CHECK_THROWS_AS(exchangeable_params(2.0, 2, 1.0), DomainError);
    CHECK(exchangeable_urn(10.0, 7, 100.0).a() == doctest::Approx(0.0));
}

TEST_CASE("exchangeable urn has the PD step law") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint64_t nu = rng.below(6);
        const double rho = static_cast<double>(nu) + testing::uniform_in(rng, 0.1, 10.0);
        const double n0 = testing::uniform_in(rng, 0.1, 50.0);
        std::vector<std::uint64_t> counts(rng.below(15));
        for (auto& c : counts) c = 1 + rng.below(20);
        const auto urn = umt_step_probs(exchangeable_urn(rho, nu, n0), counts);
        if (nu == 0) continue;
        const auto pd = pd_step_probs(exchangeable_params(rho, nu, n0), counts);
        CHECK(urn.p_new == doctest::Approx(pd.p_new).epsilon(1e-12));
        REQUIRE(urn.p_old.size() == pd.p_old.size());
        double total = urn.p_new;
        for (std::size_t i = 0; i < pd.p_old.size(); ++i) {
            CHECK(urn.p_old[i] == doctest::Approx(pd.p_old[i]).epsilon(1e-12));
            total += urn.p_old[i];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("urn step probabilities sum to one for general parameters") {
    Rng rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        UrnParams p;
        p.nu = rng.below(5);
        p.rho = testing::uniform_in(rng, 0.5, 8.0);
        p.rho_tilde = testing::uniform_in(rng, 0.0, 8.0);
        p.n0 = testing::uniform_in(rng, 0.5, 20.0);
        std::vector<std::uint64_t> counts(1 + rng.below(10));
        for (auto& c : counts) c = 1 + rng.below(10);
        const auto probs = umt_step_probs(p, counts);
        double total = probs.p_new;
        for (const auto q : probs.p_old) total += q;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("simulated PD sequences follow the expected distinct-type growth") {
    for (const auto& params : {AuthorParams{0.5, 2.0}, AuthorParams{0.3, 20.0}, AuthorParams{0.8, 1.0}}) {
        const std::uint64_t n = 2000;
        const int reps = 200;
        const double mean = mean_distinct([&](std::uint64_t s) { return simulate_pd(params, n, s); }, reps);
        const double expected = expected_distinct(params.alpha, params.theta, n);
        // Monte Carlo tolerance: D_n has standard deviation well below its mean here.
        CHECK(mean == doctest::Approx(expected).epsilon(0.05));
    }
}

TEST_CASE("exchangeable urn simulation matches the PD mean") {
    const double rho = 4.0, n0 = 8.0;
    const std::uint64_t nu = 2, n = 2000;
    const auto pd = exchangeable_params(rho, nu, n0);
    const double mean =
        mean_distinct([&](std::uint64_t s) { return simulate_umt(exchangeable_urn(rho, nu, n0), n, s); }, 200);
    CHECK(mean == doctest::Approx(expected_distinct(pd.alpha, pd.theta, n)).epsilon(0.05));
}

TEST_CASE("second draw novelty frequency of the general urn") {
    UrnParams p;
    p.rho = 3.0;
    p.rho_tilde = 1.0;
    p.nu = 2;
    p.n0 = 2.0;
    const double expected = umt_step_probs(p, {1}).p_new;
    int novel = 0;
    const int reps = 20000;
    for (int r = 0; r < reps; ++r) novel += simulate_umt(p, 2, r).distinct_trace[1] == 2;
    const double freq = static_cast<double>(novel) / reps;
    const double sd = std::sqrt(expected * (1 - expected) / reps);
    CHECK(std::abs(freq - expected) < 5 * sd);
}

TEST_CASE("simulation determinism and trace shape") {
    const auto a = simulate_pd({0.5, 3.0}, 500, 42);
    const auto b = simulate_pd({0.5, 3.0}, 500, 42);
    CHECK(a.sequence == b.sequence);
    CHECK(a.sequence.size() == 500);
    CHECK(a.distinct_trace.front() == 1);
    for (std::size_t t = 1; t < a.distinct_trace.size(); ++t) {
        CHECK(a.distinct_trace[t] >= a.distinct_trace[t - 1]);
        CHECK(a.distinct_trace[t] <= a.distinct_trace[t - 1] + 1);
    }
    CHECK(simulate_pd({0.5, 3.0}, 500, 43).sequence != a.sequence);
}

TEST_CASE("heaps exponent of synthetic traces") {
    std::vector<std::uint64_t> linear(20000), flat(20000, 7), root(20000);
    for (std::size_t t = 0; t < linear.size(); ++t) {
        linear[t] = t + 1;
        root[t] = static_cast<std::uint64_t>(std::llround(10.0 * std::sqrt(static_cast<double>(t + 1))));
    }
    CHECK(heaps_exponent(linear) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(heaps_exponent(flat) == doctest::Approx(0.0).scale(1.0));
    CHECK(heaps_exponent(root) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK_THROWS_AS(heaps_exponent(std::vector<std::uint64_t>(100, 1)), DataError);
}

TEST_CASE("trace csv") {
    const auto seq = simulate_pd({0.5, 1.0}, 5, 1);
    std::ostringstream out;
    write_trace_csv(out, seq, 2);
    const auto text = out.str();
    CHECK(text.rfind("t,D_t\n", 0) == 0);
    CHECK(text.find("\n2,") != std::string::npos);
    CHECK(text.find("\n5,") != std::string::npos);
}

TEST_CASE("synthetic corpus generation") {
    SynthOptions options;
    options.n_authors = 3;
    options.docs_per_author = 4;
    options.tokens_per_doc = 100;
    options.vocabulary_per_author = 500;
    options.seed = 9;
    const auto a = synth_corpus(options);
    const auto b = synth_corpus(options);
    CHECK(a.corpus.size() == 12);
    CHECK(a.corpus.authors.size() == 3);
    CHECK(a.truth.size() == 3);
    for (std::size_t i = 0; i < a.corpus.size(); ++i) CHECK(a.corpus.documents[i].bytes == b.corpus.documents[i].bytes);
    for (const auto& [author, params] : a.truth) {
        CHECK(params.alpha >= 0.3);
        CHECK(params.alpha <= 0.7);
    }

    testing::TempDir dir;
    {
        std::ofstream out(dir / "synth.jsonl");
        write_corpus_jsonl(out, a.corpus);
    }
    const auto loaded = load_corpus(dir / "synth.jsonl", Layout::jsonl_manifest, Encoding::latin1);
    REQUIRE(loaded.corpus.size() == a.corpus.size());
    for (std::size_t i = 0; i < a.corpus.size(); ++i) {
        CHECK(loaded.corpus.documents[i].id == a.corpus.documents[i].id);
        CHECK(loaded.corpus.documents[i].bytes == a.corpus.documents[i].bytes);
    }
}
