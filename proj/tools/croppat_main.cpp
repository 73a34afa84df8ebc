// croppat: train, evaluate and compare crop-pattern classifiers (Gaussian
// Naive Bayes, Random Forest, feedforward deep net) on NDVI-style CSV data.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "croppat/dataset.hpp"
#include "croppat/error.hpp"
#include "croppat/harness.hpp"
#include "croppat/metrics.hpp"
#include "croppat/naive_bayes.hpp"
#include "croppat/rng.hpp"
#include "croppat/serialize.hpp"
#include "croppat/text.hpp"

namespace {

using namespace croppat;

constexpr std::uint64_t kBuiltinSeed = 1;

// Seed precedence: --seed flag, then config-file "seed", then CROPPAT_SEED,
// then the builtin default.
std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("CROPPAT_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    char* end = nullptr;
    errno = 0;
    unsigned long long v = std::strtoull(raw, &end, 10);
    if (errno != 0 || end == raw || *end != '\0')
        throw UsageError(std::string("CROPPAT_SEED is not a valid unsigned integer: '") + raw + "'");
    return static_cast<std::uint64_t>(v);
}

// Flat settings mirroring ExperimentConfig / ForestParams / TrainConfig
// field names; resolved from defaults, then config file, then flags.
struct Settings {
    double train_fraction = 0.70;
    int repeats = 10;
    std::uint64_t seed = kBuiltinSeed;
    std::vector<std::string> models = {"nb", "dnn", "rf"};
    int ntree = 300;
    std::optional<int> mtry;  // defaults to min(8, F) once data is known
    int max_depth = 0;
    int min_node_size = 1;
    std::optional<std::vector<int>> layer_sizes;  // defaults to {F, 68, 32, K}
    int epochs = 200;
    int batch_size = 32;
    double learning_rate = 0.01;
};

void apply_config_file(Settings& s, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(path + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw UsageError(path + ": config must be a single JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "train_fraction") s.train_fraction = value.get<double>();
            else if (key == "repeats") s.repeats = value.get<int>();
            else if (key == "seed") s.seed = value.get<std::uint64_t>();
            else if (key == "models") s.models = value.get<std::vector<std::string>>();
            else if (key == "ntree") s.ntree = value.get<int>();
            else if (key == "mtry") s.mtry = value.get<int>();
            else if (key == "max_depth") s.max_depth = value.get<int>();
            else if (key == "min_node_size") s.min_node_size = value.get<int>();
            else if (key == "layer_sizes") s.layer_sizes = value.get<std::vector<int>>();
            else if (key == "epochs") s.epochs = value.get<int>();
            else if (key == "batch_size") s.batch_size = value.get<int>();
            else if (key == "learning_rate") s.learning_rate = value.get<double>();
            else throw UsageError(path + ": unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(path + ": bad config value: " + e.what());
    }
}

ModelKind parse_model_name(std::string name) {
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (name == "nb") return ModelKind::NB;
    if (name == "rf") return ModelKind::RF;
    if (name == "dnn") return ModelKind::DNN;
    throw UsageError("unknown model '" + name + "' (expected nb, rf or dnn)");
}

ModelSpec make_spec(ModelKind kind, const Settings& s, const Dataset& d) {
    ModelSpec spec;
    spec.kind = kind;
    const auto f = static_cast<int>(d.feature_count);
    const int k = d.class_count();
    switch (kind) {
        case ModelKind::NB:
            break;
        case ModelKind::RF: {
            int mtry = s.mtry.value_or(std::min(8, f));
            if (mtry < 1 || mtry > f)
                throw UsageError("mtry " + std::to_string(mtry) + " outside 1.." +
                                 std::to_string(f));
            spec.forest = ForestParams{s.ntree, mtry, s.max_depth, s.min_node_size, 0};
            break;
        }
        case ModelKind::DNN: {
            spec.arch.layer_sizes = s.layer_sizes.value_or(std::vector<int>{f, 68, 32, k});
            spec.arch.validate();
            if (spec.arch.input_size() != f)
                throw UsageError("layer_sizes starts with " +
                                 std::to_string(spec.arch.input_size()) + " but data has " +
                                 std::to_string(f) + " features");
            if (spec.arch.output_size() != k)
                throw UsageError("layer_sizes ends with " +
                                 std::to_string(spec.arch.output_size()) + " but data has " +
                                 std::to_string(k) + " classes");
            spec.net = TrainConfig{s.epochs, s.batch_size, s.learning_rate, 0};
            break;
        }
    }
    return spec;
}

std::string na_or_percent(const std::optional<double>& v) {
    return v ? format_percent(*v) : std::string("NA");
}

std::string na_or_full(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("NA");
}

void print_metric_table(std::ostream& out, const MetricSet& m,
                        const std::vector<std::string>& class_names) {
    out << "accuracy: " << format_percent(m.accuracy) << "%\n";
    out << "kappa:    " << na_or_percent(m.kappa);
    if (m.kappa_band) out << "%  (" << *m.kappa_band << ")";
    out << "\n\n";

    std::size_t width = 5;
    for (const auto& name : class_names) width = std::max(width, name.size());
    out << std::left << std::setw(static_cast<int>(width)) << "class"
        << std::right << std::setw(16) << "sensitivity(%)" << std::setw(16) << "specificity(%)"
        << "\n";
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        out << std::left << std::setw(static_cast<int>(width)) << class_names[c] << std::right
            << std::setw(16) << na_or_percent(m.per_class[c].sensitivity) << std::setw(16)
            << na_or_percent(m.per_class[c].specificity) << "\n";
    }
}

void print_metric_csv(std::ostream& out, const MetricSet& m,
                      const std::vector<std::string>& class_names) {
    out << "metric,class,value\n";
    out << "accuracy,," << format_double(m.accuracy) << "\n";
    out << "kappa,," << na_or_full(m.kappa) << "\n";
    out << "kappa_band,," << (m.kappa_band ? *m.kappa_band : std::string("NA")) << "\n";
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        out << "sensitivity," << class_names[c] << ","
            << na_or_full(m.per_class[c].sensitivity) << "\n";
        out << "specificity," << class_names[c] << ","
            << na_or_full(m.per_class[c].specificity) << "\n";
    }
}

void emit_metric_set(const MetricSet& m, const std::vector<std::string>& class_names,
                     const std::string& format) {
    if (format == "json") {
        std::cout << metric_set_to_json(m, class_names).dump(2) << "\n";
    } else if (format == "csv") {
        print_metric_csv(std::cout, m, class_names);
    } else {
        print_metric_table(std::cout, m, class_names);
    }
}

void print_comparison_tables(std::ostream& out, const ComparisonReport& report) {
    std::size_t width = 5;
    for (const auto& m : report.models) width = std::max(width, m.model.size());
    const int w = static_cast<int>(width);

    out << std::left << std::setw(w) << "model" << std::right << std::setw(13) << "accuracy(%)"
        << "\n";
    for (const auto& m : report.models)
        out << std::left << std::setw(w) << m.model << std::right << std::setw(13)
            << na_or_percent(m.accuracy.mean) << "\n";
    out << "\n";

    out << std::left << std::setw(w) << "model" << std::right << std::setw(10) << "kappa(%)"
        << "  band\n";
    for (const auto& m : report.models) {
        out << std::left << std::setw(w) << m.model << std::right << std::setw(10)
            << na_or_percent(m.kappa.mean) << "  "
            << (m.kappa.mean ? kappa_band(*m.kappa.mean) : std::string("NA")) << "\n";
    }
}

void print_comparison_csv(std::ostream& out, const ComparisonReport& report) {
    out << "model,accuracy\n";
    for (const auto& m : report.models)
        out << m.model << "," << na_or_full(m.accuracy.mean) << "\n";
    out << "\nmodel,kappa,band\n";
    for (const auto& m : report.models) {
        out << m.model << "," << na_or_full(m.kappa.mean) << ","
            << (m.kappa.mean ? kappa_band(*m.kappa.mean) : std::string("NA")) << "\n";
    }
}

void write_per_class_csv(const ComparisonReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << "model,class,sensitivity,specificity\n";
    for (const auto& m : report.models) {
        for (std::size_t c = 0; c < m.per_class_mean.size(); ++c) {
            out << m.model << "," << m.class_names[c] << ","
                << na_or_full(m.per_class_mean[c].sensitivity) << ","
                << na_or_full(m.per_class_mean[c].specificity) << "\n";
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

void write_loss_csv(const std::vector<double>& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << "epoch,loss\n";
    for (std::size_t e = 0; e < trace.size(); ++e)
        out << (e + 1) << "," << format_double(trace[e]) << "\n";
    if (!out) throw DataError("write failed: " + path);
}

struct CommonFlags {
    std::string config_path;
    std::uint64_t seed_flag = 0;
    bool seed_given = false;
};

Settings resolve_settings(const CLI::App* sub, const CommonFlags& flags) {
    Settings s;
    if (auto env = env_seed()) s.seed = *env;
    if (!flags.config_path.empty()) apply_config_file(s, flags.config_path);
    if (sub->count("--seed") > 0) s.seed = flags.seed_flag;
    return s;
}

int run_generate(const std::string& out_path, int classes, int per_class, int features,
                 double noise, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.class_count = classes;
    spec.samples_per_class = static_cast<std::size_t>(per_class);
    spec.feature_count = static_cast<std::size_t>(features);
    spec.noise_sigma = noise;
    spec.seed = seed;
    Dataset d = generate_synthetic(spec);
    write_csv(d, out_path);
    std::cerr << "wrote " << d.size() << " samples (" << classes << " classes x " << per_class
              << ", " << features << " features) to " << out_path << "\n";
    return 0;
}

int run_train(const std::string& model_name, const std::string& data_path,
              const Settings& s, const std::string& out_path) {
    ModelKind kind = parse_model_name(model_name);
    Dataset raw = load_csv(data_path);
    if (raw.samples.empty()) throw DataError(data_path + ": no samples to train on");

    Normalizer norm = fit_normalizer(raw);
    Dataset train = norm.apply(raw);
    ModelSpec spec = make_spec(kind, s, train);

    TrainedModel bundle;
    bundle.feature_count = train.feature_count;
    bundle.class_names = train.class_names;
    bundle.normalizer = norm;
    switch (kind) {
        case ModelKind::NB:
            bundle.type = "nb";
            bundle.nb = NBModel::fit(train);
            break;
        case ModelKind::RF: {
            bundle.type = "rf";
            ForestParams p = spec.forest;
            p.seed = s.seed;
            bundle.rf = ForestModel::fit(train, p);
            break;
        }
        case ModelKind::DNN: {
            bundle.type = "dnn";
            TrainConfig tc = spec.net;
            tc.seed = derive_seed(s.seed, 1);
            auto trained = net_train(NetModel::init(spec.arch, derive_seed(s.seed, 0)), train, tc);
            bundle.dnn = std::move(trained.model);
            break;
        }
    }
    save_model(bundle, out_path);

    // Train-side metrics: the model applied back to its own training data.
    std::vector<int> truth, pred;
    for (const auto& sample : raw.samples) {
        truth.push_back(sample.label);
        pred.push_back(bundle.predict(sample.features));
    }
    auto metrics = compute_metrics(confusion(truth, pred, raw.class_names));
    print_metric_table(std::cout, metrics, raw.class_names);
    std::cerr << "wrote model to " << out_path << "\n";
    return 0;
}

int run_evaluate(const std::string& model_path, const std::string& data_path,
                 const std::string& format) {
    TrainedModel m = load_model(model_path);
    Dataset d = load_csv(data_path);
    if (d.samples.empty()) throw DataError(data_path + ": no samples to evaluate");
    if (d.feature_count != m.feature_count)
        throw DataError(data_path + ": has " + std::to_string(d.feature_count) +
                        " features, model expects " + std::to_string(m.feature_count));

    // Map dataset labels into the model's class order by name.
    std::vector<int> label_map(d.class_names.size());
    for (std::size_t c = 0; c < d.class_names.size(); ++c) {
        auto it = std::find(m.class_names.begin(), m.class_names.end(), d.class_names[c]);
        if (it == m.class_names.end())
            throw DataError(data_path + ": class '" + d.class_names[c] +
                            "' is not known to the model");
        label_map[c] = static_cast<int>(it - m.class_names.begin());
    }

    std::vector<int> truth, pred;
    for (const auto& sample : d.samples) {
        truth.push_back(label_map[static_cast<std::size_t>(sample.label)]);
        pred.push_back(m.predict(sample.features));
    }
    auto metrics = compute_metrics(confusion(truth, pred, m.class_names));
    emit_metric_set(metrics, m.class_names, format);
    return 0;
}

int run_compare(const std::string& data_path, const Settings& s, const std::string& out_dir,
                const std::string& format, int jobs, bool timing) {
    Dataset d = load_csv(data_path);
    if (d.samples.empty()) throw DataError(data_path + ": no samples to compare on");
    if (s.models.empty()) throw UsageError("model list is empty");

    ExperimentConfig cfg;
    cfg.train_fraction = s.train_fraction;
    cfg.repeats = s.repeats;
    cfg.master_seed = s.seed;
    cfg.jobs = jobs;
    for (const auto& name : s.models) cfg.models.push_back(make_spec(parse_model_name(name), s, d));

    ComparisonReport report = compare_models(d, cfg);

    if (format == "json") {
        std::cout << comparison_to_json(report, timing).dump(2) << "\n";
    } else if (format == "csv") {
        print_comparison_csv(std::cout, report);
    } else {
        print_comparison_tables(std::cout, report);
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        auto dir = std::filesystem::path(out_dir);
        {
            std::ofstream out(dir / "comparison.json", std::ios::binary);
            if (!out) throw DataError("cannot open file for writing: " + (dir / "comparison.json").string());
            out << comparison_to_json(report, timing).dump(2) << "\n";
        }
        write_per_class_csv(report, (dir / "per_class.csv").string());
        for (const auto& m : report.models) {
            if (!m.first_run_loss.empty())
                write_loss_csv(m.first_run_loss, (dir / "dnn_loss.csv").string());
        }
        std::cerr << "wrote comparison.json, per_class.csv"
                  << " to " << out_dir << "\n";
    }

    for (const auto& m : report.models) {
        double total = 0.0;
        for (double sec : m.seconds) total += sec;
        std::cerr << m.model << ": " << total << " s over " << m.seconds.size() << " runs\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "croppat: crop-pattern classification benchmark\n"
        "Classifiers: Gaussian Naive Bayes (variance floor 1e-9), Random Forest\n"
        "(default ntree=300, mtry=min(8,F), Gini splits), deep net (default layers\n"
        "F,68,32,K; ReLU hidden, softmax output, cross-entropy, SGD lr=0.01,\n"
        "batch=32, epochs=200). Protocol: stratified 70/30 split, 10 repeats.\n"
        "Kappa bands: <=0 chance, (0,0.21) slight, [0.21,0.41) fair, [0.41,0.61)\n"
        "moderate, [0.61,0.81) substantial, [0.81,1) nearly perfect, 1 perfect\n"
        "(gaps in the banding close downward). Seed precedence: --seed flag,\n"
        "config file, CROPPAT_SEED env var, builtin 1."};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic NDVI-phenology CSV dataset");
    int classes = 8, per_class = 50, features = 136;
    double noise = 0.02;
    CommonFlags gen_flags;
    std::string gen_out;
    gen->add_option("--classes", classes, "number of classes K")->capture_default_str();
    gen->add_option("--per-class", per_class, "samples per class")->capture_default_str();
    gen->add_option("--features", features, "features per sample F")->capture_default_str();
    gen->add_option("--noise", noise, "Gaussian noise sigma")->capture_default_str();
    gen->add_option("--seed", gen_flags.seed_flag, "generator seed");
    gen->add_option("--out", gen_out, "output CSV path")->required();

    // train
    auto* train = app.add_subcommand("train", "Fit one model on a CSV dataset and save it as JSON");
    std::string train_model, train_data, train_out;
    CommonFlags train_flags;
    train->add_option("--model", train_model, "nb | rf | dnn")
        ->required()
        ->check(CLI::IsMember({"nb", "rf", "dnn"}, CLI::ignore_case));
    train->add_option("--data", train_data, "training CSV path")->required();
    train->add_option("--config", train_flags.config_path,
                      "JSON config (keys: train_fraction, repeats, seed, models, ntree, mtry, "
                      "max_depth, min_node_size, layer_sizes, epochs, batch_size, learning_rate)");
    train->add_option("--seed", train_flags.seed_flag, "training seed (wins over config/env)");
    train->add_option("--out", train_out, "output model JSON path")->required();

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Evaluate a saved model against a labeled CSV");
    std::string eval_model, eval_data, eval_format = "table";
    eval->add_option("--model-file", eval_model, "trained model JSON")->required();
    eval->add_option("--data", eval_data, "evaluation CSV path")->required();
    eval->add_option("--format", eval_format, "table | json | csv")
        ->capture_default_str()
        ->check(CLI::IsMember({"table", "json", "csv"}));

    // compare
    auto* cmp = app.add_subcommand(
        "compare", "Run the repeated stratified-holdout comparison across models");
    std::string cmp_data, cmp_out_dir, cmp_format = "table";
    CommonFlags cmp_flags;
    int cmp_jobs = 1;
    bool cmp_timing = false;
    std::vector<std::string> cmp_models;
    int cmp_repeats = 0;
    double cmp_fraction = 0.0;
    cmp->add_option("--data", cmp_data, "labeled CSV path")->required();
    cmp->add_option("--config", cmp_flags.config_path, "JSON config (same keys as train)");
    cmp->add_option("--seed", cmp_flags.seed_flag, "master seed (wins over config/env)");
    cmp->add_option("--out-dir", cmp_out_dir,
                    "directory for comparison.json, per_class.csv and dnn_loss.csv");
    cmp->add_option("--format", cmp_format, "table | json | csv")
        ->capture_default_str()
        ->check(CLI::IsMember({"table", "json", "csv"}));
    cmp->add_option("--jobs", cmp_jobs, "worker threads (results are identical for any value)")
        ->capture_default_str();
    cmp->add_option("--models", cmp_models, "subset of nb,rf,dnn (default nb,dnn,rf)")
        ->delimiter(',');
    cmp->add_option("--repeats", cmp_repeats, "number of repeated splits (default 10)");
    cmp->add_option("--train-fraction", cmp_fraction, "train fraction (default 0.70)");
    cmp->add_flag("--timing", cmp_timing,
                  "include measured seconds_per_run in JSON (breaks byte-reproducibility)");

    try {
        app.parse(argc, argv);

        if (gen->parsed()) {
            Settings s = resolve_settings(gen, gen_flags);
            return run_generate(gen_out, classes, per_class, features, noise, s.seed);
        }
        if (train->parsed()) {
            Settings s = resolve_settings(train, train_flags);
            return run_train(train_model, train_data, s, train_out);
        }
        if (eval->parsed()) {
            return run_evaluate(eval_model, eval_data, eval_format);
        }
        if (cmp->parsed()) {
            Settings s = resolve_settings(cmp, cmp_flags);
            if (cmp->count("--models") > 0) s.models = cmp_models;
            if (cmp->count("--repeats") > 0) s.repeats = cmp_repeats;
            if (cmp->count("--train-fraction") > 0) s.train_fraction = cmp_fraction;
            return run_compare(cmp_data, s, cmp_out_dir, cmp_format, cmp_jobs, cmp_timing);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
