#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "moist/dataset.hpp"
#include "moist/neural.hpp"

namespace moist {

inline constexpr int kEncodingDim = 32;

/// Feature extractor F, label classifier G and domain discriminator D, plus
/// the standardizer the networks were trained behind.
struct AdaptModel {
    std::vector<std::string> schema;
    double lambda = 0.5;
    Standardizer standardizer;
    Network F;
    Network G;
    Network D;

    bool operator==(const AdaptModel& o) const {
        return schema == o.schema && lambda == o.lambda && standardizer.mean == o.standardizer.mean &&
               standardizer.scale == o.standardizer.scale && F == o.F && G == o.G && D == o.D;
    }
};

/// Freshly initialized networks: F in->32 ReLU, G 32->16 ReLU->3 softmax,
/// D 32->16 ReLU->1 sigmoid.
AdaptModel init_adapt_model(const std::vector<std::string>& schema, double lambda, std::uint64_t seed);

struct TrainConfig {
    int epochs = 30;
    int batch = 2;
    double lambda = 0.5;
    int warmup = 15;  // epochs without AMI scoring
    int clusters = 3;
    std::uint64_t seed = 42;
    AdamConfig adam;

    void validate() const;
    nlohmann::ordered_json to_json() const;
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double label_loss = 0;
    double domain_loss = 0;
    double total_loss = 0;
    std::optional<double> ami;
    bool checkpointed = false;
};

struct TrainReport {
    TrainConfig config;
    std::vector<EpochRecord> records;
    int best_epoch = 0;
    double best_ami = 0;

    nlohmann::ordered_json to_json() const;
};

enum class GrlMode { Reverse, Identity };

/// Gradients of one step. `F_domain` is what the domain branch sends into F:
/// with GrlMode::Reverse it is -lambda * dL_domain/dF, with Identity it is
/// dL_domain/dF. `D` holds lambda * dL_domain/dD.
struct StepGradients {
    double label_loss = 0;
    double domain_loss = 0;
    Gradients F_label;
    Gradients F_domain;
    Gradients G;
    Gradients D;
};

/// Rows must already be standardized.
StepGradients step_gradients(const AdaptModel& m, const std::vector<std::span<const double>>& source,
                             std::span<const int> labels, const std::vector<std::span<const double>>& target,
                             GrlMode mode = GrlMode::Reverse);

/// L_label and L_domain of a batch, as used by step_gradients.
std::pair<double, double> batch_losses(const AdaptModel& m, const std::vector<std::span<const double>>& source,
                                       std::span<const int> labels, const std::vector<std::span<const double>>& target);

/// AMI between argmax G(F(x)) and KMeans pseudo-labels of F(x) over the
/// standardized target rows.
double ami_callback(const AdaptModel& m, const std::vector<std::vector<double>>& target, int clusters,
                    std::uint64_t kmeans_seed);

struct TrainResult {
    AdaptModel model;
    TrainReport report;
};

/// Optional hooks for instrumentation.
struct TrainObserver {
    std::function<void(int epoch, const StepGradients&)> on_step;
    std::function<void(const EpochRecord&, const AdaptModel&)> on_epoch;
};

/// Adversarial training with the AMI checkpoint rule. The standardizer is fit
/// on source and target together. Target labels are never read.
TrainResult train_adaptmoist(const Dataset& source, const Dataset& target, const TrainConfig& cfg,
                             const TrainObserver& observer = {});

/// F(x) for each sample (raw features; the model standardizes).
std::vector<std::vector<double>> encode(const AdaptModel& m, const Dataset& ds);

struct Prediction {
    std::vector<double> probabilities;
    int label = 0;
};

std::vector<Prediction> predict(const AdaptModel& m, const Dataset& ds);
Prediction predict_one(const AdaptModel& m, std::span<const double> raw_features);

nlohmann::ordered_json adapt_model_to_json(const AdaptModel& m);
AdaptModel adapt_model_from_json(const nlohmann::ordered_json& j);

}  // namespace moist
