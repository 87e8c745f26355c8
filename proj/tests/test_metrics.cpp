#include <doctest.h>

#include <sstream>

#include "cp2d/metrics.hpp"
#include "support.hpp"

using namespace cp2d;

TEST_CASE("per-class precision, recall and F1") {
    const auto p = prf1(ClassCounts{3, 1, 1});
    CHECK(p.precision == doctest::Approx(0.75));
    CHECK(p.recall == doctest::Approx(0.75));
    CHECK(p.f1 == doctest::Approx(0.75));
    const auto empty = prf1(ClassCounts{0, 0, 0});
    CHECK(empty.precision == 0.0);
    CHECK(empty.recall == 0.0);
    CHECK(empty.f1 == 0.0);
}

TEST_CASE("macro F1 is the mean of class scores") {
    ConfusionCounts c;
    c.classes["A"] = {2, 0, 0};  // F1 = 1
    c.classes["B"] = {1, 1, 1};  // F1 = 0.5
    CHECK(prf1(c, Averaging::macro).f1 == doctest::Approx(0.75));
}

TEST_CASE("confusion counts from predictions") {
    const std::vector<Prediction> preds{{"A", "A"}, {"A", "B"}, {"B", "B"}, {"C", "B"}};
    const auto c = ConfusionCounts::from_predictions(preds);
    CHECK(c.total == 4);
    CHECK(c.classes.at("A").tp == 1);
    CHECK(c.classes.at("A").fn == 1);
    CHECK(c.classes.at("B").fp == 2);
    CHECK(c.classes.at("C").fn == 1);
    CHECK(accuracy(preds) == doctest::Approx(0.5));
    CHECK_THROWS(accuracy({}));
}

TEST_CASE("micro averages equal accuracy for single-label predictions") {
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Prediction> preds(1 + rng.below(50));
        const std::size_t classes = 1 + rng.below(5);
        for (auto& p : preds) {
            p.truth = std::string(1, static_cast<char>('a' + rng.below(classes)));
            p.predicted = rng.below(3) ? p.truth : std::string(1, static_cast<char>('a' + rng.below(classes)));
        }
        const auto report = evaluate(preds);
        CHECK(report.micro.precision == doctest::Approx(report.accuracy));
        CHECK(report.micro.recall == doctest::Approx(report.accuracy));
        CHECK(report.micro.f1 == doctest::Approx(report.accuracy));
        for (const auto& [name, prf] : report.per_class) {
            CHECK(prf.f1 >= 0.0);
            CHECK(prf.f1 <= 1.0);
            // Harmonic mean form, when defined.
            if (prf.precision + prf.recall > 0)
                CHECK(prf.f1 == doctest::Approx(2 * prf.precision * prf.recall / (prf.precision + prf.recall)));
        }
    }
}

TEST_CASE("metrics csv and summary") {
    const auto report = evaluate({{"A", "A"}, {"B", "A"}});
    std::ostringstream out;
    write_metrics_csv(out, report);
    CHECK(out.str().rfind("class,precision,recall,f1\nA,", 0) == 0);
    const auto summary = metrics_summary(report);
    CHECK(summary["accuracy"] == doctest::Approx(0.5));
    CHECK(summary.contains("macro"));
    CHECK(summary.contains("micro"));
}
