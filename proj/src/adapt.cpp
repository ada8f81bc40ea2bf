#include "moist/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "moist/classifiers.hpp"
#include "moist/clustering.hpp"

namespace moist {

AdaptModel init_adapt_model(const std::vector<std::string>& schema, double lambda, std::uint64_t seed) {
    const int dim = static_cast<int>(schema.size());
    if (dim < 1)
        throw std::invalid_argument("adapt: empty feature schema");
    AdaptModel m;
    m.schema = schema;
    m.lambda = lambda;
    m.standardizer = {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
    m.F = init_network({dim, {{kEncodingDim, Activation::Relu}}}, seed);
    m.G = init_network({kEncodingDim, {{16, Activation::Relu}, {kClassCount, Activation::Softmax}}}, seed + 1);
    m.D = init_network({kEncodingDim, {{16, Activation::Relu}, {1, Activation::Sigmoid}}}, seed + 2);
    return m;
}

void TrainConfig::validate() const {
    if (epochs < 1 || batch < 1 || clusters < 2 || warmup < 0 || warmup >= epochs)
        throw std::invalid_argument("train config: need epochs >= 1, batch >= 1, clusters >= 2, 0 <= warmup < epochs");
    if (!(lambda >= 0) || !std::isfinite(lambda))
        throw std::invalid_argument("train config: lambda must be a finite non-negative number");
}

nlohmann::ordered_json TrainConfig::to_json() const {
    return {{"epochs", epochs},   {"batch", batch}, {"lambda", lambda},         {"warmup", warmup},
            {"clusters", clusters}, {"seed", seed}, {"learningRate", adam.lr}};
}

nlohmann::ordered_json TrainReport::to_json() const {
    nlohmann::ordered_json j;
    j["config"] = config.to_json();
    nlohmann::ordered_json recs = nlohmann::ordered_json::array();
    for (const EpochRecord& r : records) {
        nlohmann::ordered_json e;
        e["epoch"] = r.epoch;
        e["labelLoss"] = r.label_loss;
        e["domainLoss"] = r.domain_loss;
        e["totalLoss"] = r.total_loss;
        e["ami"] = r.ami ? nlohmann::ordered_json(*r.ami) : nlohmann::ordered_json(nullptr);
        e["checkpointed"] = r.checkpointed;
        recs.push_back(std::move(e));
    }
    j["records"] = std::move(recs);
    j["bestEpoch"] = best_epoch;
    j["bestAmi"] = best_ami;
    return j;
}

namespace {

void check_batch(const std::vector<std::span<const double>>& source, std::span<const int> labels,
                 const std::vector<std::span<const double>>& target) {
    if (source.empty() || target.empty())
        throw std::invalid_argument("adapt: empty batch");
    if (source.size() != labels.size())
        throw std::invalid_argument("adapt: source rows and labels differ in count");
}

}  // namespace

StepGradients step_gradients(const AdaptModel& m, const std::vector<std::span<const double>>& source,
                             std::span<const int> labels, const std::vector<std::span<const double>>& target,
                             GrlMode mode) {
    check_batch(source, labels, target);
    StepGradients out{0, 0, Gradients::zeros_like(m.F), Gradients::zeros_like(m.F), Gradients::zeros_like(m.G),
                      Gradients::zeros_like(m.D)};
    const double ns = static_cast<double>(source.size());
    const double nd = static_cast<double>(source.size() + target.size());

    auto domain_branch = [&](const Activations& f_acts, int d) {
        const Activations d_acts = forward(m.D, f_acts.back());
        const double p = d_acts.back()[0];
        out.domain_loss += binary_cross_entropy(p, d) / nd;
        const double delta = (p - d) / nd;
        Gradients d_grads = Gradients::zeros_like(m.D);
        const std::vector<double> df = backward(m.D, d_acts, std::span(&delta, 1), d_grads, GradientAt::PreActivation);
        out.D.add(d_grads, m.lambda);
        if (mode == GrlMode::Reverse)
            backward(m.F, f_acts, grl_backward(df, m.lambda), out.F_domain);
        else
            backward(m.F, f_acts, df, out.F_domain);
    };

    for (std::size_t i = 0; i < source.size(); ++i) {
        const Activations f_acts = forward(m.F, source[i]);
        const Activations g_acts = forward(m.G, f_acts.back());
        out.label_loss += cross_entropy(g_acts.back(), labels[i]) / ns;
        std::vector<double> delta = g_acts.back();
        delta[labels[i]] -= 1.0;
        for (double& v : delta)
            v /= ns;
        const std::vector<double> df = backward(m.G, g_acts, delta, out.G, GradientAt::PreActivation);
        backward(m.F, f_acts, df, out.F_label);
        domain_branch(f_acts, 0);
    }
    for (std::span<const double> x : target)
        domain_branch(forward(m.F, x), 1);
    return out;
}

std::pair<double, double> batch_losses(const AdaptModel& m, const std::vector<std::span<const double>>& source,
                                       std::span<const int> labels, const std::vector<std::span<const double>>& target) {
    check_batch(source, labels, target);
    double label = 0, domain = 0;
    const double nd = static_cast<double>(source.size() + target.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
        const std::vector<double> f = predict_output(m.F, source[i]);
        label += cross_entropy(predict_output(m.G, f), labels[i]);
        domain += binary_cross_entropy(predict_output(m.D, f)[0], 0) / nd;
    }
    for (std::span<const double> x : target)
        domain += binary_cross_entropy(predict_output(m.D, predict_output(m.F, x))[0], 1) / nd;
    return {label / static_cast<double>(source.size()), domain};
}

double ami_callback(const AdaptModel& m, const std::vector<std::vector<double>>& target, int clusters,
                    std::uint64_t kmeans_seed) {
    if (target.empty())
        throw std::invalid_argument("ami_callback: empty target");
    std::vector<Point> encoded;
    std::vector<int> predicted;
    for (const auto& x : target) {
        encoded.push_back(predict_output(m.F, x));
        predicted.push_back(argmax(predict_output(m.G, encoded.back())));
    }
    if (encoded.size() < 2)
        return 0.0;
    const KMeansResult km = kmeans(encoded, std::min<int>(clusters, static_cast<int>(encoded.size())), kmeans_seed);
    return ami(predicted, km.assignments);
}

namespace {

void check_domains(const Dataset& source, const Dataset& target) {
    if (source.empty() || target.empty())
        throw std::invalid_argument("adapt: source and target must be non-empty");
    if (source.schema != target.schema)
        throw std::invalid_argument("adapt: source and target feature schemas differ");
    source.validate();
    target.validate();
    std::set<int> classes;
    for (int y : source.labels())
        classes.insert(y);
    if (static_cast<int>(classes.size()) != kClassCount)
        throw std::invalid_argument("adapt: every class must be present in the source domain");
}

std::vector<std::span<const double>> rows_at(const std::vector<std::vector<double>>& rows,
                                             const std::vector<std::size_t>& order, std::size_t start, int count) {
    std::vector<std::span<const double>> out;
    for (int b = 0; b < count; ++b)
        out.emplace_back(rows[order[(start + b) % order.size()]]);
    return out;
}

}  // namespace

TrainResult train_adaptmoist(const Dataset& source, const Dataset& target, const TrainConfig& cfg,
                             const TrainObserver& observer) {
    cfg.validate();
    check_domains(source, target);

    AdaptModel model = init_adapt_model(source.schema, cfg.lambda, cfg.seed);
    std::vector<std::vector<double>> pooled = source.matrix();
    for (const Sample& s : target.samples)
        pooled.push_back(s.features);
    model.standardizer = Standardizer::fit(pooled);
    const auto xs = model.standardizer.apply(source.matrix());
    const auto xt = model.standardizer.apply(target.matrix());
    const std::vector<int> ys = source.labels();

    AdamState adam_f = AdamState::for_network(model.F, cfg.adam);
    AdamState adam_g = AdamState::for_network(model.G, cfg.adam);
    AdamState adam_d = AdamState::for_network(model.D, cfg.adam);

    std::mt19937_64 rng(cfg.seed ^ 0x2545f4914f6cdd1dULL);
    std::vector<std::size_t> src_order(xs.size()), tgt_order(xt.size());
    std::iota(src_order.begin(), src_order.end(), 0);
    std::iota(tgt_order.begin(), tgt_order.end(), 0);
    const std::size_t longest = std::max(xs.size(), xt.size());
    const std::size_t steps = (longest + cfg.batch - 1) / cfg.batch;

    TrainResult result{model, {cfg, {}, 0, 0}};
    bool have_checkpoint = false;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(src_order.begin(), src_order.end(), rng);
        std::shuffle(tgt_order.begin(), tgt_order.end(), rng);
        double label_sum = 0, domain_sum = 0;
        for (std::size_t s = 0; s < steps; ++s) {
            const std::size_t start = s * cfg.batch;
            const auto src = rows_at(xs, src_order, start, cfg.batch);
            const auto tgt = rows_at(xt, tgt_order, start, cfg.batch);
            std::vector<int> labels;
            for (int b = 0; b < cfg.batch; ++b)
                labels.push_back(ys[src_order[(start + b) % src_order.size()]]);

            StepGradients g = step_gradients(model, src, labels, tgt);
            if (observer.on_step)
                observer.on_step(epoch, g);
            label_sum += g.label_loss;
            domain_sum += g.domain_loss;
            g.F_label.add(g.F_domain);
            adam_step(adam_f, model.F, g.F_label);
            adam_step(adam_g, model.G, g.G);
            adam_step(adam_d, model.D, g.D);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.label_loss = label_sum / static_cast<double>(steps);
        rec.domain_loss = domain_sum / static_cast<double>(steps);
        rec.total_loss = rec.label_loss + cfg.lambda * rec.domain_loss;
        if (!std::isfinite(rec.total_loss))
            throw NumericError("adapt: non-finite loss in epoch " + std::to_string(epoch));
        if (epoch > cfg.warmup) {
            rec.ami = ami_callback(model, xt, cfg.clusters, cfg.seed + static_cast<std::uint64_t>(epoch));
            if (!have_checkpoint || *rec.ami > result.report.best_ami) {
                have_checkpoint = true;
                rec.checkpointed = true;
                result.report.best_ami = *rec.ami;
                result.report.best_epoch = epoch;
                result.model = model;
            }
        }
        result.report.records.push_back(rec);
        if (observer.on_epoch)
            observer.on_epoch(rec, model);
    }
    if (!have_checkpoint)
        result.model = model;
    return result;
}

std::vector<std::vector<double>> encode(const AdaptModel& m, const Dataset& ds) {
    if (ds.schema != m.schema)
        throw std::invalid_argument("encode: feature schema does not match the model");
    std::vector<std::vector<double>> out;
    for (const Sample& s : ds.samples)
        out.push_back(predict_output(m.F, m.standardizer.apply(s.features)));
    return out;
}

Prediction predict_one(const AdaptModel& m, std::span<const double> raw_features) {
    if (raw_features.size() != m.schema.size())
        throw std::invalid_argument("predict: feature count does not match the model");
    Prediction p;
    p.probabilities = predict_output(m.G, predict_output(m.F, m.standardizer.apply(raw_features)));
    p.label = argmax(p.probabilities);
    return p;
}

std::vector<Prediction> predict(const AdaptModel& m, const Dataset& ds) {
    if (ds.schema != m.schema)
        throw std::invalid_argument("predict: feature schema does not match the model");
    std::vector<Prediction> out;
    for (const Sample& s : ds.samples)
        out.push_back(predict_one(m, s.features));
    return out;
}

nlohmann::ordered_json adapt_model_to_json(const AdaptModel& m) {
    nlohmann::ordered_json j;
    j["schema"] = m.schema;
    j["lambda"] = m.lambda;
    j["standardizer"] = {{"mean", m.standardizer.mean}, {"scale", m.standardizer.scale}};
    j["F"] = network_to_json(m.F);
    j["G"] = network_to_json(m.G);
    j["D"] = network_to_json(m.D);
    return j;
}

AdaptModel adapt_model_from_json(const nlohmann::ordered_json& j) {
    AdaptModel m;
    try {
        m.schema = j.at("schema").get<std::vector<std::string>>();
        m.lambda = j.at("lambda").get<double>();
        m.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
        m.standardizer.scale = j.at("standardizer").at("scale").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("adapt model: ") + e.what());
    }
    m.F = network_from_json(j.at("F"));
    m.G = network_from_json(j.at("G"));
    m.D = network_from_json(j.at("D"));
    const std::size_t dim = m.schema.size();
    if (m.standardizer.mean.size() != dim || m.standardizer.scale.size() != dim || m.F.input_dim() != static_cast<int>(dim) ||
        m.F.output_dim() != kEncodingDim || m.G.input_dim() != kEncodingDim || m.G.output_dim() != kClassCount ||
        m.D.input_dim() != kEncodingDim || m.D.output_dim() != 1 || !(m.lambda >= 0))
        throw std::invalid_argument("adapt model: inconsistent dimensions");
    return m;
}

}  // namespace moist
