#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace moist {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
    int classes = 0;
    std::vector<long> counts;

    long at(int truth, int predicted) const { return counts[static_cast<std::size_t>(truth) * classes + predicted]; }
    long total() const;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int classes);

struct ClassMetrics {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    long support = 0;
};

/// Accuracy plus one-vs-rest and support-weighted precision/recall/F1. Every
/// 0/0 is taken as 0.
struct MetricsReport {
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    std::vector<ClassMetrics> per_class;
};

MetricsReport metrics(const ConfusionMatrix& cm);

nlohmann::ordered_json metrics_to_json(const MetricsReport& report, const std::vector<std::string>& class_names);
nlohmann::ordered_json confusion_to_json(const ConfusionMatrix& cm);

/// Fixed-width text table with a header row of predicted classes.
std::string render_confusion(const ConfusionMatrix& cm, const std::vector<std::string>& class_names);

}  // namespace moist
