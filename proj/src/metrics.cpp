#include "cp2d/metrics.hpp"

#include <stdexcept>

namespace cp2d {

double accuracy(const std::vector<Prediction>& predictions) {
    if (predictions.empty()) throw std::invalid_argument("accuracy: no predictions");
    std::uint64_t correct = 0;
    for (const auto& p : predictions) correct += p.truth == p.predicted;
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

ConfusionCounts ConfusionCounts::from_predictions(const std::vector<Prediction>& predictions) {
    ConfusionCounts out;
    for (const auto& p : predictions) {
        ++out.total;
        out.classes[p.truth];
        out.classes[p.predicted];
        if (p.truth == p.predicted) {
            ++out.classes[p.truth].tp;
        } else {
            ++out.classes[p.predicted].fp;
            ++out.classes[p.truth].fn;
        }
    }
    return out;
}

namespace {
double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

Prf prf1(const ClassCounts& c) {
    return {ratio(c.tp, c.tp + c.fp), ratio(c.tp, c.tp + c.fn), ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn)};
}

std::map<std::string, Prf> prf1_per_class(const ConfusionCounts& confusion) {
    std::map<std::string, Prf> out;
    for (const auto& [name, counts] : confusion.classes) out[name] = prf1(counts);
    return out;
}

Prf prf1(const ConfusionCounts& confusion, Averaging averaging) {
    if (averaging == Averaging::micro) {
        ClassCounts pooled;
        for (const auto& [name, c] : confusion.classes) {
            pooled.tp += c.tp;
            pooled.fp += c.fp;
            pooled.fn += c.fn;
        }
        return prf1(pooled);
    }
    Prf mean;
    if (confusion.classes.empty()) return mean;
    for (const auto& [name, c] : confusion.classes) {
        const Prf p = prf1(c);
        mean.precision += p.precision;
        mean.recall += p.recall;
        mean.f1 += p.f1;
    }
    const double n = static_cast<double>(confusion.classes.size());
    mean.precision /= n;
    mean.recall /= n;
    mean.f1 /= n;
    return mean;
}

MetricsReport evaluate(const std::vector<Prediction>& predictions) {
    MetricsReport report;
    report.accuracy = accuracy(predictions);
    const auto confusion = ConfusionCounts::from_predictions(predictions);
    report.per_class = prf1_per_class(confusion);
    report.macro = prf1(confusion, Averaging::macro);
    report.micro = prf1(confusion, Averaging::micro);
    return report;
}

void write_metrics_csv(std::ostream& out, const MetricsReport& report) {
    out << "class,precision,recall,f1\n";
    for (const auto& [name, p] : report.per_class)
        out << name << ',' << p.precision << ',' << p.recall << ',' << p.f1 << '\n';
}

nlohmann::json metrics_summary(const MetricsReport& report) {
    const auto prf = [](const Prf& p) {
        return nlohmann::json{{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
    };
    return {{"accuracy", report.accuracy}, {"macro", prf(report.macro)}, {"micro", prf(report.micro)}};
}

}  // namespace cp2d
