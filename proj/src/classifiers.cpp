#include "moist/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace moist {

namespace {

void check_training(const Matrix& x, std::span<const int> y, int classes) {
    if (x.empty())
        throw std::invalid_argument("empty training set");
    if (x.size() != y.size())
        throw std::invalid_argument("feature rows and labels differ in count");
    for (const auto& r : x)
        if (r.size() != x.front().size())
            throw std::invalid_argument("ragged feature rows");
    for (int label : y)
        if (label < 0 || label >= classes)
            throw std::invalid_argument("label out of range");
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

}  // namespace

int argmax(std::span<const double> v) {
    if (v.empty())
        throw std::invalid_argument("argmax of empty vector");
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<Fold> stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
    if (k < 2)
        throw std::invalid_argument("stratified_kfold: k must be at least 2");
    const int classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<std::size_t>> by_class(std::max(classes, 0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0)
            throw std::invalid_argument("stratified_kfold: negative label");
        by_class[labels[i]].push_back(i);
    }
    std::mt19937_64 rng(seed);
    std::vector<int> fold_of(labels.size(), 0);
    int position = 0;
    for (auto& members : by_class) {
        if (members.empty())
            continue;
        if (static_cast<int>(members.size()) < k)
            throw std::invalid_argument("stratified_kfold: a class has fewer members than folds");
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t i : members)
            fold_of[i] = position++ % k;
    }
    std::vector<Fold> folds(k);
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (int f = 0; f < k; ++f)
            (f == fold_of[i] ? folds[f].validation : folds[f].train).push_back(i);
    return folds;
}

std::vector<double> knn_classify(const Matrix& x, std::span<const int> y, std::span<const double> query, int k,
                                 int classes) {
    check_training(x, y, classes);
    if (k < 1 || static_cast<std::size_t>(k) > x.size())
        throw std::invalid_argument("knn: k must be in [1, training size]");
    if (query.size() != x.front().size())
        throw std::invalid_argument("knn: query dimension mismatch");
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double s = 0;
        for (std::size_t d = 0; d < query.size(); ++d) {
            const double t = x[i][d] - query[d];
            s += t * t;
        }
        dist.emplace_back(s, i);
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::vector<double> p(classes, 0.0);
    for (int n = 0; n < k; ++n)
        p[y[dist[n].second]] += 1.0;
    for (double& v : p)
        v /= k;
    return p;
}

std::vector<double> predict_proba(const KnnModel& m, std::span<const double> x) {
    return knn_classify(m.x, m.y, x, std::min<int>(m.k, static_cast<int>(m.x.size())));
}

// ---------------------------------------------------------------- logistic regression

namespace {

// Largest eigenvalue of the mean outer product of [x, 1], by power iteration.
double gram_spectral_radius(const Matrix& x) {
    const std::size_t dim = x.front().size() + 1;
    std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim))), w(dim);
    double lambda = 0;
    for (int it = 0; it < 200; ++it) {
        std::fill(w.begin(), w.end(), 0.0);
        for (const auto& r : x) {
            double s = v[dim - 1];
            for (std::size_t d = 0; d + 1 < dim; ++d)
                s += r[d] * v[d];
            for (std::size_t d = 0; d + 1 < dim; ++d)
                w[d] += s * r[d];
            w[dim - 1] += s;
        }
        double norm = 0;
        for (double& t : w) {
            t /= static_cast<double>(x.size());
            norm += t * t;
        }
        norm = std::sqrt(norm);
        if (norm == 0)
            return 0;
        lambda = norm;
        for (std::size_t d = 0; d < dim; ++d)
            v[d] = w[d] / norm;
    }
    return lambda;
}

std::vector<double> logits(const LogRegModel& m, std::span<const double> x) {
    std::vector<double> z(m.classes);
    for (int c = 0; c < m.classes; ++c)
        z[c] = dot(std::span(m.weights).subspan(static_cast<std::size_t>(c) * m.dim, m.dim), x) + m.biases[c];
    return z;
}

}  // namespace

LogRegModel fit_logreg(const Matrix& x, std::span<const int> y, const LogRegConfig& cfg, int classes) {
    check_training(x, y, classes);
    if (cfg.l2 < 0)
        throw std::invalid_argument("logreg: negative penalty");
    const int dim = static_cast<int>(x.front().size());
    const double n = static_cast<double>(x.size());
    LogRegModel m{classes, dim, std::vector<double>(static_cast<std::size_t>(classes) * dim, 0.0),
                  std::vector<double>(classes, 0.0), 0};

    // The softmax cross-entropy Hessian is bounded by 1/2 times the Gram matrix.
    const double lipschitz = 0.5 * gram_spectral_radius(x) * 1.05 + cfg.l2 / n;
    const double step = lipschitz > 0 ? 1.0 / lipschitz : 1.0;

    std::vector<double> gw(m.weights.size()), gb(classes);
    for (m.iterations = 0; m.iterations < cfg.max_iter; ++m.iterations) {
        for (std::size_t i = 0; i < m.weights.size(); ++i)
            gw[i] = cfg.l2 * m.weights[i];
        std::fill(gb.begin(), gb.end(), 0.0);
        for (std::size_t s = 0; s < x.size(); ++s) {
            std::vector<double> p = softmax(logits(m, x[s]));
            p[y[s]] -= 1.0;
            for (int c = 0; c < classes; ++c) {
                gb[c] += p[c];
                double* row = gw.data() + static_cast<std::size_t>(c) * dim;
                for (int d = 0; d < dim; ++d)
                    row[d] += p[c] * x[s][d];
            }
        }
        double norm2 = 0;
        for (double& g : gw) {
            g /= n;
            norm2 += g * g;
        }
        for (double& g : gb) {
            g /= n;
            norm2 += g * g;
        }
        if (std::sqrt(norm2) < cfg.tol)
            break;
        for (std::size_t i = 0; i < m.weights.size(); ++i)
            m.weights[i] -= step * gw[i];
        for (int c = 0; c < classes; ++c)
            m.biases[c] -= step * gb[c];
    }
    return m;
}

std::vector<double> predict_proba(const LogRegModel& m, std::span<const double> x) {
    if (static_cast<int>(x.size()) != m.dim)
        throw std::invalid_argument("logreg: input dimension mismatch");
    return softmax(logits(m, x));
}

// ---------------------------------------------------------------- Gaussian naive Bayes

GnbModel fit_gnb(const Matrix& x, std::span<const int> y, int classes) {
    check_training(x, y, classes);
    const std::size_t dim = x.front().size();
    const double n = static_cast<double>(x.size());
    GnbModel m;
    m.log_priors.assign(classes, -std::numeric_limits<double>::infinity());
    m.means.assign(classes, std::vector<double>(dim, 0.0));
    m.variances.assign(classes, std::vector<double>(dim, 0.0));
    std::vector<double> counts(classes, 0.0);
    for (std::size_t s = 0; s < x.size(); ++s) {
        counts[y[s]] += 1;
        for (std::size_t d = 0; d < dim; ++d)
            m.means[y[s]][d] += x[s][d];
    }
    for (int c = 0; c < classes; ++c)
        if (counts[c] > 0)
            for (double& v : m.means[c])
                v /= counts[c];
    for (std::size_t s = 0; s < x.size(); ++s)
        for (std::size_t d = 0; d < dim; ++d) {
            const double t = x[s][d] - m.means[y[s]][d];
            m.variances[y[s]][d] += t * t;
        }

    // Floor relative to the largest feature variance of the pooled data.
    double max_var = 0;
    for (std::size_t d = 0; d < dim; ++d) {
        double mu = 0, var = 0;
        for (const auto& r : x)
            mu += r[d];
        mu /= n;
        for (const auto& r : x)
            var += (r[d] - mu) * (r[d] - mu);
        max_var = std::max(max_var, var / n);
    }
    const double floor = max_var > 0 ? 1e-9 * max_var : 1e-9;

    for (int c = 0; c < classes; ++c) {
        if (counts[c] == 0)
            continue;
        m.log_priors[c] = std::log(counts[c] / n);
        for (double& v : m.variances[c])
            v = std::max(v / counts[c], floor);
    }
    return m;
}

std::vector<double> predict_proba(const GnbModel& m, std::span<const double> x) {
    const int classes = static_cast<int>(m.log_priors.size());
    std::vector<double> logp(classes, -std::numeric_limits<double>::infinity());
    for (int c = 0; c < classes; ++c) {
        if (!std::isfinite(m.log_priors[c]))
            continue;
        if (x.size() != m.means[c].size())
            throw std::invalid_argument("gnb: input dimension mismatch");
        double s = m.log_priors[c];
        for (std::size_t d = 0; d < x.size(); ++d) {
            const double var = m.variances[c][d];
            const double t = x[d] - m.means[c][d];
            s -= 0.5 * (std::log(2 * std::numbers::pi * var) + t * t / var);
        }
        logp[c] = s;
    }
    const double top = *std::max_element(logp.begin(), logp.end());
    std::vector<double> p(classes, 0.0);
    double total = 0;
    for (int c = 0; c < classes; ++c) {
        p[c] = std::isfinite(logp[c]) ? std::exp(logp[c] - top) : 0.0;
        total += p[c];
    }
    for (double& v : p)
        v /= total;
    return p;
}

// ---------------------------------------------------------------- MLP

MlpModel fit_mlp(const Matrix& x, std::span<const int> y, const MlpConfig& cfg, std::uint64_t seed, int classes) {
    check_training(x, y, classes);
    if (cfg.hidden < 1 || cfg.epochs < 0 || cfg.batch < 1)
        throw std::invalid_argument("mlp: invalid configuration");
    const int dim = static_cast<int>(x.front().size());
    MlpModel m{init_network({dim, {{cfg.hidden, Activation::Relu}, {classes, Activation::Softmax}}}, seed)};
    AdamState adam = AdamState::for_network(m.net, cfg.adam);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch);
            Gradients grads = Gradients::zeros_like(m.net);
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t s = order[b];
                const Activations acts = forward(m.net, x[s]);
                std::vector<double> delta = acts.back();
                delta[y[s]] -= 1.0;
                backward(m.net, acts, delta, grads, GradientAt::PreActivation);
            }
            grads.scale(1.0 / static_cast<double>(stop - start));
            adam_step(adam, m.net, grads);
        }
    }
    return m;
}

std::vector<double> predict_proba(const MlpModel& m, std::span<const double> x) { return predict_output(m.net, x); }

// ---------------------------------------------------------------- voting and dispatch

std::pair<int, std::vector<double>> soft_vote(const std::vector<std::vector<double>>& probas) {
    if (probas.empty())
        throw std::invalid_argument("soft_vote: no members");
    std::vector<double> mean(probas.front().size(), 0.0);
    for (const auto& p : probas) {
        if (p.size() != mean.size())
            throw std::invalid_argument("soft_vote: members disagree on class count");
        for (std::size_t c = 0; c < p.size(); ++c)
            mean[c] += p[c];
    }
    for (double& v : mean)
        v /= static_cast<double>(probas.size());
    return {argmax(mean), mean};
}

std::string_view model_name(ModelKind kind) noexcept {
    switch (kind) {
        case ModelKind::Knn: return "knn";
        case ModelKind::LogReg: return "logreg";
        case ModelKind::Gnb: return "gnb";
        case ModelKind::Mlp: return "mlp";
        case ModelKind::Voting: return "voting";
    }
    return "";
}

std::optional<ModelKind> parse_model(std::string_view name) noexcept {
    for (ModelKind k : {ModelKind::Knn, ModelKind::LogReg, ModelKind::Gnb, ModelKind::Mlp, ModelKind::Voting})
        if (model_name(k) == name)
            return k;
    return std::nullopt;
}

nlohmann::ordered_json ModelSpec::params_json() const {
    nlohmann::ordered_json j;
    auto add = [&](ModelKind k) {
        switch (k) {
            case ModelKind::Knn: j["knn"] = {{"k", knn_k}}; break;
            case ModelKind::LogReg:
                j["logreg"] = {{"l2", logreg.l2}, {"tol", logreg.tol}, {"maxIter", logreg.max_iter}};
                break;
            case ModelKind::Gnb: j["gnb"] = {{"varianceFloor", 1e-9}}; break;
            case ModelKind::Mlp:
                j["mlp"] = {{"hidden", mlp.hidden}, {"epochs", mlp.epochs}, {"batch", mlp.batch},
                            {"learningRate", mlp.adam.lr}};
                break;
            case ModelKind::Voting: break;
        }
    };
    if (kind == ModelKind::Voting) {
        nlohmann::ordered_json members = nlohmann::ordered_json::array();
        for (ModelKind k : voting_members) {
            members.push_back(std::string(model_name(k)));
            add(k);
        }
        j["members"] = members;
    } else {
        add(kind);
    }
    return j;
}

TrainedModel fit_model(const ModelSpec& spec, const Matrix& x, std::span<const int> y, std::uint64_t seed) {
    switch (spec.kind) {
        case ModelKind::Knn:
            check_training(x, y, kClassCount);
            return {spec.kind, KnnModel{x, std::vector<int>(y.begin(), y.end()), spec.knn_k}};
        case ModelKind::LogReg: return {spec.kind, fit_logreg(x, y, spec.logreg)};
        case ModelKind::Gnb: return {spec.kind, fit_gnb(x, y)};
        case ModelKind::Mlp: return {spec.kind, fit_mlp(x, y, spec.mlp, seed)};
        case ModelKind::Voting: {
            if (spec.voting_members.empty())
                throw std::invalid_argument("voting: no members");
            std::vector<TrainedModel> members;
            for (ModelKind k : spec.voting_members) {
                if (k == ModelKind::Voting)
                    throw std::invalid_argument("voting: nested ensembles are not supported");
                ModelSpec member = spec;
                member.kind = k;
                members.push_back(fit_model(member, x, y, seed));
            }
            return {spec.kind, std::move(members)};
        }
    }
    throw std::invalid_argument("unknown model kind");
}

std::vector<double> predict_proba(const TrainedModel& m, std::span<const double> x) {
    if (const auto* members = std::get_if<std::vector<TrainedModel>>(&m.body)) {
        std::vector<std::vector<double>> probas;
        for (const TrainedModel& member : *members)
            probas.push_back(predict_proba(member, x));
        return soft_vote(probas).second;
    }
    return std::visit(
        [&](const auto& model) -> std::vector<double> {
            if constexpr (std::is_same_v<std::decay_t<decltype(model)>, std::vector<TrainedModel>>)
                return {};
            else
                return predict_proba(model, x);
        },
        m.body);
}

// ---------------------------------------------------------------- cross-validation

namespace {

MetricsReport mean_of(const std::vector<FoldResult>& folds) {
    MetricsReport r;
    for (const FoldResult& f : folds) {
        r.accuracy += f.metrics.accuracy;
        r.precision += f.metrics.precision;
        r.recall += f.metrics.recall;
        r.f1 += f.metrics.f1;
    }
    const double n = static_cast<double>(folds.size());
    r.accuracy /= n;
    r.precision /= n;
    r.recall /= n;
    r.f1 /= n;
    return r;
}

MetricsReport stdev_of(const std::vector<FoldResult>& folds, const MetricsReport& mean) {
    MetricsReport r;
    for (const FoldResult& f : folds) {
        r.accuracy += (f.metrics.accuracy - mean.accuracy) * (f.metrics.accuracy - mean.accuracy);
        r.precision += (f.metrics.precision - mean.precision) * (f.metrics.precision - mean.precision);
        r.recall += (f.metrics.recall - mean.recall) * (f.metrics.recall - mean.recall);
        r.f1 += (f.metrics.f1 - mean.f1) * (f.metrics.f1 - mean.f1);
    }
    const double n = static_cast<double>(folds.size());
    r.accuracy = std::sqrt(r.accuracy / n);
    r.precision = std::sqrt(r.precision / n);
    r.recall = std::sqrt(r.recall / n);
    r.f1 = std::sqrt(r.f1 / n);
    return r;
}

nlohmann::ordered_json summary_json(const MetricsReport& r) {
    return {{"accuracy", r.accuracy}, {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}};
}

}  // namespace

CvReport cross_validate(const Dataset& ds, const ModelSpec& spec, int k, std::uint64_t seed) {
    ds.validate();
    const std::vector<int> labels = ds.labels();
    CvReport report;
    report.model = std::string(model_name(spec.kind));
    report.folds = k;
    report.seed = seed;
    report.params = spec.params_json();

    const Matrix all = ds.matrix();
    for (const Fold& fold : stratified_kfold(labels, k, seed)) {
        Matrix train, valid;
        std::vector<int> y_train, y_valid;
        for (std::size_t i : fold.train) {
            train.push_back(all[i]);
            y_train.push_back(labels[i]);
        }
        for (std::size_t i : fold.validation) {
            valid.push_back(all[i]);
            y_valid.push_back(labels[i]);
        }
        const Standardizer st = Standardizer::fit(train);
        const TrainedModel model =
            fit_model(spec, st.apply(train), y_train, seed + static_cast<std::uint64_t>(report.per_fold.size()));
        std::vector<int> predicted;
        for (const auto& row : valid)
            predicted.push_back(argmax(predict_proba(model, st.apply(row))));
        FoldResult fr{fold, confusion(y_valid, predicted, kClassCount), {}};
        fr.metrics = metrics(fr.confusion);
        report.per_fold.push_back(std::move(fr));
    }
    report.mean = mean_of(report.per_fold);
    report.stdev = stdev_of(report.per_fold, report.mean);
    return report;
}

nlohmann::ordered_json CvReport::to_json() const {
    nlohmann::ordered_json j;
    j["model"] = model;
    j["folds"] = folds;
    j["seed"] = seed;
    j["params"] = params;
    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (std::size_t f = 0; f < per_fold.size(); ++f) {
        nlohmann::ordered_json e;
        e["fold"] = f;
        e["validationSize"] = per_fold[f].fold.validation.size();
        e["metrics"] = metrics_to_json(per_fold[f].metrics, {"Dry", "Medium", "Wet"});
        e["confusion"] = confusion_to_json(per_fold[f].confusion);
        per.push_back(std::move(e));
    }
    j["perFold"] = std::move(per);
    j["mean"] = summary_json(mean);
    j["stdev"] = summary_json(stdev);
    return j;
}

}  // namespace moist
