#include "croppat/harness.hpp"

#include <chrono>
#include <cmath>

#include "croppat/error.hpp"
#include "croppat/naive_bayes.hpp"
#include "croppat/parallel.hpp"
#include "croppat/rng.hpp"

namespace croppat {

namespace {

// Stream tags under a run seed.
constexpr std::uint64_t kSplitStream = 0;
constexpr std::uint64_t kForestStream = 1;
constexpr std::uint64_t kNetInitStream = 2;
constexpr std::uint64_t kNetShuffleStream = 3;

struct RunResult {
    MetricSet metrics;
    double seconds = 0.0;
    std::vector<double> loss_trace;  // DNN only
};

RunResult execute_run(const Dataset& d, const ExperimentConfig& cfg, const ModelSpec& spec,
                      int run) {
    const std::uint64_t rs = run_seed(cfg.master_seed, run);
    auto [train_raw, test_raw] =
        stratified_split(d, SplitSpec{cfg.train_fraction, derive_seed(rs, kSplitStream)});

    auto started = std::chrono::steady_clock::now();

    Normalizer norm = fit_normalizer(train_raw);
    Dataset train = norm.apply(train_raw);
    Dataset test = norm.apply(test_raw);

    std::vector<int> truth;
    truth.reserve(test.size());
    for (const auto& s : test.samples) truth.push_back(s.label);
    std::vector<int> pred;
    pred.reserve(test.size());

    RunResult result;
    switch (spec.kind) {
        case ModelKind::NB: {
            NBModel m = NBModel::fit(train);
            for (const auto& s : test.samples) pred.push_back(m.predict(s.features));
            break;
        }
        case ModelKind::RF: {
            ForestParams p = spec.forest;
            p.seed = derive_seed(rs, kForestStream);
            ForestModel m = ForestModel::fit(train, p);
            for (const auto& s : test.samples) pred.push_back(m.predict(s.features));
            break;
        }
        case ModelKind::DNN: {
            TrainConfig tc = spec.net;
            tc.seed = derive_seed(rs, kNetShuffleStream);
            NetModel init = NetModel::init(spec.arch, derive_seed(rs, kNetInitStream));
            auto trained = net_train(std::move(init), train, tc);
            for (const auto& s : test.samples) pred.push_back(trained.model.predict(s.features));
            result.loss_trace = std::move(trained.epoch_loss);
            break;
        }
    }

    result.metrics = compute_metrics(confusion(truth, pred, d.class_names));
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

RunResult execute_run_annotated(const Dataset& d, const ExperimentConfig& cfg,
                                const ModelSpec& spec, int run) {
    auto where = [&] { return spec.name() + " run " + std::to_string(run + 1) + ": "; };
    try {
        return execute_run(d, cfg, spec, run);
    } catch (const NumericError& e) {
        throw NumericError(where() + e.what());
    } catch (const DataError& e) {
        throw DataError(where() + e.what());
    } catch (const UsageError& e) {
        throw UsageError(where() + e.what());
    }
}

MetricAggregate aggregate(const std::vector<std::optional<double>>& values) {
    std::vector<double> present;
    for (const auto& v : values)
        if (v) present.push_back(*v);
    MetricAggregate agg;
    if (present.empty()) return agg;
    double sum = 0.0;
    for (double v : present) sum += v;
    double mean = sum / static_cast<double>(present.size());
    agg.mean = mean;
    if (present.size() >= 2) {
        double ss = 0.0;
        for (double v : present) ss += (v - mean) * (v - mean);
        agg.sd = std::sqrt(ss / static_cast<double>(present.size() - 1));
    }
    return agg;
}

EvaluationReport assemble_report(const Dataset& d, const ExperimentConfig& cfg,
                                 const ModelSpec& spec, std::vector<RunResult> runs) {
    EvaluationReport report;
    report.model = spec.name();
    report.class_names = d.class_names;
    report.config_echo = cfg;

    std::vector<std::optional<double>> accuracies, kappas;
    for (auto& r : runs) {
        accuracies.emplace_back(r.metrics.accuracy);
        kappas.push_back(r.metrics.kappa);
        report.seconds.push_back(r.seconds);
        report.runs.push_back(std::move(r.metrics));
    }
    report.accuracy = aggregate(accuracies);
    report.kappa = aggregate(kappas);
    if (!runs.empty()) report.first_run_loss = std::move(runs.front().loss_trace);

    for (int c = 0; c < d.class_count(); ++c) {
        std::vector<std::optional<double>> sens, spec_values;
        for (const auto& run : report.runs) {
            sens.push_back(run.per_class[static_cast<std::size_t>(c)].sensitivity);
            spec_values.push_back(run.per_class[static_cast<std::size_t>(c)].specificity);
        }
        report.per_class_mean.push_back({aggregate(sens).mean, aggregate(spec_values).mean});
    }
    return report;
}

void check_config(const ExperimentConfig& cfg) {
    if (cfg.repeats < 1) throw UsageError("repeats must be at least 1");
    if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0)
        throw UsageError("train_fraction must lie strictly between 0 and 1");
}

}  // namespace

std::string ModelSpec::name() const {
    switch (kind) {
        case ModelKind::NB: return "NB";
        case ModelKind::RF: return "RF";
        case ModelKind::DNN: return "DNN";
    }
    return "?";
}

std::uint64_t run_seed(std::uint64_t master_seed, int run) {
    return derive_seed(master_seed, static_cast<std::uint64_t>(run));
}

std::vector<std::pair<Dataset, Dataset>> make_run_splits(const Dataset& d,
                                                         const ExperimentConfig& cfg) {
    check_config(cfg);
    std::vector<std::pair<Dataset, Dataset>> splits;
    splits.reserve(static_cast<std::size_t>(cfg.repeats));
    for (int r = 0; r < cfg.repeats; ++r) {
        std::uint64_t rs = run_seed(cfg.master_seed, r);
        splits.push_back(
            stratified_split(d, SplitSpec{cfg.train_fraction, derive_seed(rs, kSplitStream)}));
    }
    return splits;
}

EvaluationReport run_experiment(const Dataset& d, const ExperimentConfig& cfg,
                                const ModelSpec& spec) {
    check_config(cfg);
    std::vector<RunResult> runs(static_cast<std::size_t>(cfg.repeats));
    parallel_for(cfg.jobs, runs.size(), [&](std::size_t r) {
        runs[r] = execute_run_annotated(d, cfg, spec, static_cast<int>(r));
    });
    return assemble_report(d, cfg, spec, std::move(runs));
}

ComparisonReport compare_models(const Dataset& d, const ExperimentConfig& cfg) {
    check_config(cfg);
    if (cfg.models.empty()) throw UsageError("comparison needs at least one model spec");

    const auto repeats = static_cast<std::size_t>(cfg.repeats);
    const auto n_models = cfg.models.size();
    std::vector<RunResult> all(n_models * repeats);
    parallel_for(cfg.jobs, all.size(), [&](std::size_t task) {
        std::size_t model_idx = task / repeats;
        int run = static_cast<int>(task % repeats);
        all[task] = execute_run_annotated(d, cfg, cfg.models[model_idx], run);
    });

    ComparisonReport report;
    report.config = cfg;
    for (std::size_t mi = 0; mi < n_models; ++mi) {
        std::vector<RunResult> runs(std::make_move_iterator(all.begin() + static_cast<std::ptrdiff_t>(mi * repeats)),
                                    std::make_move_iterator(all.begin() + static_cast<std::ptrdiff_t>((mi + 1) * repeats)));
        report.models.push_back(assemble_report(d, cfg, cfg.models[mi], std::move(runs)));
    }
    return report;
}

}  // namespace croppat
