#include "moist/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace moist {

long ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), 0L); }

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int classes) {
    if (classes < 1)
        throw std::invalid_argument("confusion: class count must be positive");
    if (y_true.size() != y_pred.size())
        throw std::invalid_argument("confusion: label sequences differ in length");
    ConfusionMatrix cm{classes, std::vector<long>(static_cast<std::size_t>(classes) * classes, 0)};
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] < 0 || y_true[i] >= classes || y_pred[i] < 0 || y_pred[i] >= classes)
            throw std::invalid_argument("confusion: label out of range");
        ++cm.counts[static_cast<std::size_t>(y_true[i]) * classes + y_pred[i]];
    }
    return cm;
}

namespace {

double ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

double ordered_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0;
    for (double t : terms)
        s += t;
    return s;
}

}  // namespace

MetricsReport metrics(const ConfusionMatrix& cm) {
    const long n = cm.total();
    if (n < 1)
        throw std::invalid_argument("metrics: empty confusion matrix");
    const int c = cm.classes;
    MetricsReport r;
    long trace = 0;
    // Weighted sums are accumulated as (support / denominator) * numerator so
    // that the recall terms reduce to TP exactly and weighted recall equals
    // accuracy bit for bit. Sorting the terms makes the sums independent of
    // class order.
    std::vector<double> w_precision, w_recall, w_f1;
    for (int k = 0; k < c; ++k) {
        long tp = cm.at(k, k), row = 0, col = 0;
        for (int j = 0; j < c; ++j) {
            row += cm.at(k, j);
            col += cm.at(j, k);
        }
        const long fp = col - tp, fn = row - tp;
        trace += tp;
        ClassMetrics m;
        m.support = row;
        m.precision = ratio(tp, tp + fp);
        m.recall = ratio(tp, tp + fn);
        // 2PR / (P + R), written over integer counts.
        m.f1 = ratio(2.0 * tp, 2.0 * tp + fp + fn);
        r.per_class.push_back(m);

        const double s = static_cast<double>(row);
        w_precision.push_back(ratio(s, tp + fp) * tp);
        w_recall.push_back(ratio(s, tp + fn) * tp);
        w_f1.push_back(ratio(s, 2.0 * tp + fp + fn) * 2.0 * tp);
    }
    r.accuracy = static_cast<double>(trace) / n;
    r.precision = ordered_sum(std::move(w_precision)) / n;
    r.recall = ordered_sum(std::move(w_recall)) / n;
    r.f1 = ordered_sum(std::move(w_f1)) / n;
    return r;
}

nlohmann::ordered_json metrics_to_json(const MetricsReport& report, const std::vector<std::string>& class_names) {
    nlohmann::ordered_json j;
    j["accuracy"] = report.accuracy;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["f1"] = report.f1;
    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < report.per_class.size(); ++k) {
        nlohmann::ordered_json e;
        e["class"] = k < class_names.size() ? class_names[k] : std::to_string(k);
        e["precision"] = report.per_class[k].precision;
        e["recall"] = report.per_class[k].recall;
        e["f1"] = report.per_class[k].f1;
        e["support"] = report.per_class[k].support;
        per.push_back(std::move(e));
    }
    j["perClass"] = std::move(per);
    return j;
}

nlohmann::ordered_json confusion_to_json(const ConfusionMatrix& cm) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int t = 0; t < cm.classes; ++t) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int p = 0; p < cm.classes; ++p)
            row.push_back(cm.at(t, p));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string render_confusion(const ConfusionMatrix& cm, const std::vector<std::string>& class_names) {
    auto name = [&](int k) { return k < static_cast<int>(class_names.size()) ? class_names[k] : std::to_string(k); };
    std::size_t width = 11;
    for (int k = 0; k < cm.classes; ++k)
        width = std::max(width, name(k).size() + 2);
    for (long v : cm.counts)
        width = std::max(width, std::to_string(v).size() + 2);

    auto pad = [&](const std::string& s) { return std::string(width - std::min(width, s.size()), ' ') + s; };
    std::ostringstream out;
    out << pad("true\\pred");
    for (int p = 0; p < cm.classes; ++p)
        out << pad(name(p));
    out << '\n';
    for (int t = 0; t < cm.classes; ++t) {
        out << pad(name(t));
        for (int p = 0; p < cm.classes; ++p)
            out << pad(std::to_string(cm.at(t, p)));
        out << '\n';
    }
    return out.str();
}

}  // namespace moist
