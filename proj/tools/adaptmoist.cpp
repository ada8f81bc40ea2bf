#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "moist/adapt.hpp"
#include "moist/classifiers.hpp"
#include "moist/features.hpp"
#include "moist/image.hpp"
#include "moist/metrics.hpp"
#include "moist/synth.hpp"

namespace fs = std::filesystem;
using namespace moist;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << text;
    if (!out)
        throw IoError("failed writing " + path.string());
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::ordered_json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    try {
        return nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string fixed(double v, int digits = 4) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    fs::path out;
    std::string shift = "strong";
    int per_class = 50;
    std::uint64_t seed = 42;
    int size = kDefaultImageSize;
};

void run_synth(const SynthArgs& a) {
    const ScenarioSummary s = generate_scenario(*parse_shift(a.shift), a.per_class, a.seed, a.out, a.size);
    std::cout << "wrote " << s.images << " images (" << a.per_class << " per class and domain, shift " << a.shift
              << ", seed " << a.seed << ")\n";
    for (const auto& f : s.label_files)
        std::cout << "  " << f.string() << "\n";
}

// ---------------------------------------------------------------- extract

struct ExtractArgs {
    fs::path images;
    fs::path labels;
    std::string family;
    fs::path out;
    int jobs = 1;
};

struct LabelRow {
    std::string id;
    std::string domain;
    std::optional<int> label;
};

std::vector<LabelRow> read_labels(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"id", "domain", "label"})
        throw FormatError(path.string() + ": header must be id,domain,label");
    std::vector<LabelRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r")
            continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 3 || cells[0].empty())
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected id,domain,label");
        LabelRow r{cells[0], cells[1], std::nullopt};
        if (!cells[2].empty()) {
            r.label = parse_class(cells[2]);
            if (!r.label)
                throw FormatError(path.string() + ":" + std::to_string(lineno) + ": unknown label '" + cells[2] + "'");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

fs::path image_path(const fs::path& dir, const std::string& id) {
    return fs::path(id).extension() == ".png" ? dir / id : dir / (id + ".png");
}

void run_extract(const ExtractArgs& a) {
    const auto family = parse_family(a.family);
    const std::vector<LabelRow> rows = read_labels(a.labels);
    Dataset ds;
    ds.schema = feature_names(*family);
    ds.samples.resize(rows.size());

    // Workers pull indices; each result lands in its own slot so the output
    // order never depends on scheduling.
    std::vector<std::exception_ptr> errors(rows.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            try {
                const GrayImage img = load_image(image_path(a.images, rows[i].id));
                ds.samples[i] = {rows[i].id, extract_features(img, *family).values, rows[i].label, rows[i].domain};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(a.jobs, static_cast<int>(std::max<std::size_t>(rows.size(), 1))));
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    for (const Sample& s : ds.samples)
        for (double v : s.features)
            if (!std::isfinite(v))
                throw NumericError("non-finite feature for '" + s.id + "'");
    write_feature_csv(a.out, ds);
    std::cout << "extracted " << ds.schema.size() << " " << a.family << " features from " << ds.size()
              << " images -> " << a.out.string() << "\n";
}

// ---------------------------------------------------------------- baseline

struct BaselineArgs {
    fs::path features;
    std::string model = "voting";
    int folds = 4;
    std::uint64_t seed = 42;
    fs::path report;
};

void run_baseline(const BaselineArgs& a) {
    const Dataset ds = read_feature_csv(a.features);
    if (!ds.fully_labeled())
        throw UsageError(a.features.string() + " contains unlabeled rows");
    ModelSpec spec;
    spec.kind = *parse_model(a.model);
    CvReport r;
    try {
        r = cross_validate(ds, spec, a.folds, a.seed);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    write_json(a.report, r.to_json());
    std::cout << "model " << r.model << ", " << r.folds << "-fold stratified CV, seed " << r.seed << "\n";
    auto line = [](const char* name, double m, double s) {
        std::cout << "  " << name << std::string(11 - std::string(name).size(), ' ') << fixed(m) << " (" << fixed(s)
                  << ")\n";
    };
    line("accuracy", r.mean.accuracy, r.stdev.accuracy);
    line("precision", r.mean.precision, r.stdev.precision);
    line("recall", r.mean.recall, r.stdev.recall);
    line("f1", r.mean.f1, r.stdev.f1);
}

// ---------------------------------------------------------------- adapt

struct AdaptArgs {
    fs::path source;
    fs::path target;
    TrainConfig cfg;
    fs::path model_out;
    fs::path report;
};

void run_adapt(const AdaptArgs& a) {
    const Dataset source = read_feature_csv(a.source);
    Dataset target = read_feature_csv(a.target);
    for (Sample& s : target.samples)
        s.label.reset();
    if (source.schema != target.schema)
        throw UsageError("source and target feature columns differ");
    if (!source.fully_labeled())
        throw UsageError(a.source.string() + " contains unlabeled rows");
    TrainResult r;
    try {
        r = train_adaptmoist(source, target, a.cfg);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    write_json(a.model_out, adapt_model_to_json(r.model));
    write_json(a.report, r.report.to_json());
    std::cout << "epoch  label     domain    total     ami\n";
    for (const EpochRecord& e : r.report.records) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%5d  %.6f  %.6f  %.6f  %s%s\n", e.epoch, e.label_loss, e.domain_loss,
                      e.total_loss, e.ami ? fixed(*e.ami).c_str() : "-", e.checkpointed ? "  *" : "");
        std::cout << buf;
    }
    std::cout << "best epoch " << r.report.best_epoch << ", AMI " << fixed(r.report.best_ami) << "\n";
}

// ---------------------------------------------------------------- eval / predict

struct ModelArgs {
    fs::path model;
    fs::path features;
    fs::path out;
};

std::pair<AdaptModel, Dataset> load_model_and_features(const ModelArgs& a) {
    AdaptModel model;
    try {
        model = adapt_model_from_json(read_json(a.model));
    } catch (const std::invalid_argument& e) {
        throw FormatError(a.model.string() + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(a.model.string() + ": " + e.what());
    }
    Dataset ds = read_feature_csv(a.features);
    if (ds.schema != model.schema)
        throw UsageError("feature columns of " + a.features.string() + " do not match the model");
    return {std::move(model), std::move(ds)};
}

void run_eval(const ModelArgs& a) {
    const auto [model, ds] = load_model_and_features(a);
    if (!ds.fully_labeled())
        throw UsageError(a.features.string() + " contains unlabeled rows");
    std::vector<int> predicted;
    for (const Prediction& p : predict(model, ds))
        predicted.push_back(p.label);
    const ConfusionMatrix cm = confusion(ds.labels(), predicted, kClassCount);
    const MetricsReport m = metrics(cm);
    const std::vector<std::string> names{"Dry", "Medium", "Wet"};
    nlohmann::ordered_json j = metrics_to_json(m, names);
    j["samples"] = ds.size();
    j["confusion"] = confusion_to_json(cm);
    write_json(a.out, j);
    std::cout << "accuracy " << fixed(m.accuracy) << "  precision " << fixed(m.precision) << "  recall "
              << fixed(m.recall) << "  f1 " << fixed(m.f1) << "\n"
              << render_confusion(cm, names);
}

void run_predict(const ModelArgs& a) {
    const auto [model, ds] = load_model_and_features(a);
    std::string text = "id,predicted,probDry,probMedium,probWet\n";
    const auto preds = predict(model, ds);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        for (double p : preds[i].probabilities)
            if (!std::isfinite(p))
                throw NumericError("non-finite probability for '" + ds.samples[i].id + "'");
        text += ds.samples[i].id + "," + std::string(class_name(preds[i].label));
        for (double p : preds[i].probabilities)
            text += "," + format_double(p);
        text += "\n";
    }
    write_text(a.out, text);
    std::cout << "wrote " << preds.size() << " predictions -> " << a.out.string() << "\n";
}

// ---------------------------------------------------------------- driver

CLI::Validator one_of(std::vector<std::string> options) {
    return CLI::IsMember(std::move(options));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Texture-based moisture classification with unsupervised domain adaptation", "adaptmoist"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic two-domain texture dataset");
    cmd_synth->add_option("--out", synth.out, "output directory")->required();
    cmd_synth->add_option("--shift", synth.shift, "none, mild or strong")
        ->check(one_of({"none", "mild", "strong"}))
        ->capture_default_str();
    cmd_synth->add_option("--per-class", synth.per_class, "images per class and domain (>= 10)")
        ->check(CLI::Range(10, 100000))
        ->capture_default_str();
    cmd_synth->add_option("--seed", synth.seed, "random seed")->capture_default_str();
    cmd_synth->add_option("--size", synth.size, "image side length in pixels")
        ->check(CLI::Range(32, 4096))
        ->capture_default_str();

    ExtractArgs extract;
    auto* cmd_extract = app.add_subcommand("extract", "compute texture features for a labelled image set");
    cmd_extract->add_option("--images", extract.images, "image directory")->required();
    cmd_extract->add_option("--labels", extract.labels, "labels.csv with id,domain,label")->required();
    cmd_extract->add_option("--family", extract.family, "haralick, fos, fps, glrlm, lbp or combined")
        ->required()
        ->check(one_of({"haralick", "fos", "fps", "glrlm", "lbp", "combined"}));
    cmd_extract->add_option("--out", extract.out, "feature CSV to write")->required();
    cmd_extract->add_option("--jobs", extract.jobs, "worker threads")->check(CLI::Range(1, 256))->capture_default_str();

    BaselineArgs baseline;
    auto* cmd_baseline = app.add_subcommand("baseline", "stratified cross-validation of a classic classifier");
    cmd_baseline->add_option("--features", baseline.features, "labelled feature CSV")->required();
    cmd_baseline->add_option("--model", baseline.model, "knn, logreg, gnb, mlp or voting")
        ->check(one_of({"knn", "logreg", "gnb", "mlp", "voting"}))
        ->capture_default_str();
    cmd_baseline->add_option("--folds", baseline.folds, "number of folds")->check(CLI::Range(2, 1000))->capture_default_str();
    cmd_baseline->add_option("--seed", baseline.seed, "random seed")->capture_default_str();
    cmd_baseline->add_option("--report", baseline.report, "report JSON to write")->required();

    AdaptArgs adapt;
    auto* cmd_adapt = app.add_subcommand("adapt", "train the domain-adversarial model with AMI checkpointing");
    cmd_adapt->add_option("--source", adapt.source, "labelled source feature CSV")->required();
    cmd_adapt->add_option("--target", adapt.target, "target feature CSV (labels ignored)")->required();
    cmd_adapt->add_option("--epochs", adapt.cfg.epochs, "training epochs")->check(CLI::PositiveNumber)->capture_default_str();
    cmd_adapt->add_option("--batch", adapt.cfg.batch, "samples per domain and step")->check(CLI::PositiveNumber)->capture_default_str();
    cmd_adapt->add_option("--lambda", adapt.cfg.lambda, "domain loss weight")->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd_adapt->add_option("--warmup", adapt.cfg.warmup, "epochs before AMI scoring")->check(CLI::NonNegativeNumber)->capture_default_str();
    cmd_adapt->add_option("--clusters", adapt.cfg.clusters, "KMeans clusters for pseudo-labels")->check(CLI::Range(2, 1000))->capture_default_str();
    cmd_adapt->add_option("--lr", adapt.cfg.adam.lr, "Adam learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    cmd_adapt->add_option("--seed", adapt.cfg.seed, "random seed")->capture_default_str();
    cmd_adapt->add_option("--model-out", adapt.model_out, "model JSON to write")->required();
    cmd_adapt->add_option("--report", adapt.report, "training report JSON to write")->required();

    ModelArgs eval;
    auto* cmd_eval = app.add_subcommand("eval", "evaluate a trained model on labelled features");
    cmd_eval->add_option("--model", eval.model, "model JSON")->required();
    cmd_eval->add_option("--features", eval.features, "labelled feature CSV")->required();
    cmd_eval->add_option("--report", eval.out, "metrics JSON to write")->required();

    ModelArgs pred;
    auto* cmd_predict = app.add_subcommand("predict", "predict moisture classes");
    cmd_predict->add_option("--model", pred.model, "model JSON")->required();
    cmd_predict->add_option("--features", pred.features, "feature CSV")->required();
    cmd_predict->add_option("--out", pred.out, "prediction CSV to write")->required();

    fs::path manifest_out;
    auto* cmd_manifest = app.add_subcommand("manifest", "print the feature-name manifest as JSON");
    cmd_manifest->add_option("--out", manifest_out, "write to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        std::cerr << sub->help();
        return kExitUsage;
    }

    try {
        if (*cmd_synth)
            run_synth(synth);
        else if (*cmd_extract)
            run_extract(extract);
        else if (*cmd_baseline)
            run_baseline(baseline);
        else if (*cmd_adapt)
            run_adapt(adapt);
        else if (*cmd_eval)
            run_eval(eval);
        else if (*cmd_predict)
            run_predict(pred);
        else if (*cmd_manifest) {
            if (manifest_out.empty())
                std::cout << feature_manifest_json();
            else
                write_text(manifest_out, feature_manifest_json());
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const FormatError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
