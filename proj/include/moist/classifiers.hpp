#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "moist/dataset.hpp"
#include "moist/metrics.hpp"
#include "moist/neural.hpp"

namespace moist {

using Matrix = std::vector<std::vector<double>>;

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

/// Per class, indices are shuffled with `seed` and dealt round-robin, the
/// dealing position carrying over from one class to the next.
std::vector<Fold> stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed);

/// Neighbour class frequencies among the k nearest training rows (Euclidean,
/// lower index first on equal distance).
std::vector<double> knn_classify(const Matrix& x, std::span<const int> y, std::span<const double> query, int k,
                                 int classes = kClassCount);

struct LogRegConfig {
    double l2 = 1.0;  // penalty (l2 / 2)|W|^2 added to the summed cross-entropy
    double tol = 1e-6;
    int max_iter = 5000;
};

struct LogRegModel {
    int classes = 0;
    int dim = 0;
    std::vector<double> weights;  // classes x dim
    std::vector<double> biases;
    int iterations = 0;
};

LogRegModel fit_logreg(const Matrix& x, std::span<const int> y, const LogRegConfig& cfg = {},
                       int classes = kClassCount);
std::vector<double> predict_proba(const LogRegModel& m, std::span<const double> x);

struct GnbModel {
    std::vector<double> log_priors;  // -inf for classes absent from training
    Matrix means;
    Matrix variances;
};

GnbModel fit_gnb(const Matrix& x, std::span<const int> y, int classes = kClassCount);
std::vector<double> predict_proba(const GnbModel& m, std::span<const double> x);

struct MlpConfig {
    int hidden = 100;
    int epochs = 200;
    int batch = 32;
    AdamConfig adam;
};

struct MlpModel {
    Network net;
};

MlpModel fit_mlp(const Matrix& x, std::span<const int> y, const MlpConfig& cfg, std::uint64_t seed,
                 int classes = kClassCount);
std::vector<double> predict_proba(const MlpModel& m, std::span<const double> x);

struct KnnModel {
    Matrix x;
    std::vector<int> y;
    int k = 5;
};

std::vector<double> predict_proba(const KnnModel& m, std::span<const double> x);

/// Mean of the member distributions and its argmax (lowest index on ties).
std::pair<int, std::vector<double>> soft_vote(const std::vector<std::vector<double>>& probas);

int argmax(std::span<const double> v);

enum class ModelKind { Knn, LogReg, Gnb, Mlp, Voting };

std::string_view model_name(ModelKind kind) noexcept;
std::optional<ModelKind> parse_model(std::string_view name) noexcept;

struct ModelSpec {
    ModelKind kind = ModelKind::Voting;
    int knn_k = 5;
    LogRegConfig logreg;
    MlpConfig mlp;
    std::vector<ModelKind> voting_members = {ModelKind::LogReg, ModelKind::Gnb, ModelKind::Mlp};

    nlohmann::ordered_json params_json() const;
};

struct TrainedModel {
    ModelKind kind;
    std::variant<KnnModel, LogRegModel, GnbModel, MlpModel, std::vector<TrainedModel>> body;
};

/// Fits on already standardized rows.
TrainedModel fit_model(const ModelSpec& spec, const Matrix& x, std::span<const int> y, std::uint64_t seed);
std::vector<double> predict_proba(const TrainedModel& m, std::span<const double> x);

struct FoldResult {
    Fold fold;
    ConfusionMatrix confusion;
    MetricsReport metrics;
};

struct CvReport {
    std::string model;
    int folds = 0;
    std::uint64_t seed = 0;
    nlohmann::ordered_json params;
    std::vector<FoldResult> per_fold;
    MetricsReport mean;   // accuracy/precision/recall/f1 averaged over folds
    MetricsReport stdev;  // population standard deviation over folds

    nlohmann::ordered_json to_json() const;
};

/// Stratified k-fold evaluation. The standardizer is refit on each training
/// fold and the fold index is added to the seed for model fitting.
CvReport cross_validate(const Dataset& ds, const ModelSpec& spec, int k = 4, std::uint64_t seed = 42);

}  // namespace moist
