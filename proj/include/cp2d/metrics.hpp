#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace cp2d {

struct Prediction {
    std::string truth;
    std::string predicted;
};

double accuracy(const std::vector<Prediction>& predictions);

struct ClassCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
};

struct ConfusionCounts {
    std::map<std::string, ClassCounts> classes;
    std::uint64_t total = 0;

    static ConfusionCounts from_predictions(const std::vector<Prediction>& predictions);
};

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

enum class Averaging { macro, micro };

/// Empty denominators give 0. F1 is evaluated as 2TP / (2TP + FP + FN),
/// algebraically the harmonic mean of precision and recall.
Prf prf1(const ClassCounts& counts);
std::map<std::string, Prf> prf1_per_class(const ConfusionCounts& confusion);
Prf prf1(const ConfusionCounts& confusion, Averaging averaging);

struct MetricsReport {
    double accuracy = 0.0;
    std::map<std::string, Prf> per_class;
    Prf macro;
    Prf micro;
};

MetricsReport evaluate(const std::vector<Prediction>& predictions);

/// `class,precision,recall,f1` rows.
void write_metrics_csv(std::ostream& out, const MetricsReport& report);
nlohmann::json metrics_summary(const MetricsReport& report);

}  // namespace cp2d
