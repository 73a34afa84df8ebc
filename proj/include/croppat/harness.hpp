#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "croppat/dataset.hpp"
#include "croppat/forest.hpp"
#include "croppat/metrics.hpp"
#include "croppat/net.hpp"

namespace croppat {

enum class ModelKind { NB, RF, DNN };

struct ModelSpec {
    ModelKind kind = ModelKind::NB;
    ForestParams forest;  // RF only
    NetArch arch;         // DNN only
    TrainConfig net;      // DNN only

    std::string name() const;
};

struct ExperimentConfig {
    double train_fraction = 0.70;
    int repeats = 10;
    std::uint64_t master_seed = 0;
    std::vector<ModelSpec> models;
    int jobs = 1;  // worker threads; never affects results
};

/// Seed of run r, derived from the master seed. Every per-run random
/// stream (split, RF, DNN init, DNN shuffle) is derived from this value
/// with a fixed stream tag, which is what lets concurrent runs reproduce
/// sequential results and guarantees all models see identical splits.
std::uint64_t run_seed(std::uint64_t master_seed, int run);

/// The train/test partitions used for runs 0..repeats-1. Model-independent
/// by construction: only (dataset, train_fraction, master_seed, run) enter.
std::vector<std::pair<Dataset, Dataset>> make_run_splits(const Dataset& d,
                                                         const ExperimentConfig& cfg);

struct MetricAggregate {
    std::optional<double> mean;
    std::optional<double> sd;  // sample standard deviation; absent below 2 values
};

struct EvaluationReport {
    std::string model;
    std::vector<MetricSet> runs;
    std::vector<double> seconds;  // wall time per run
    MetricAggregate accuracy;
    MetricAggregate kappa;
    // Per-class sensitivity/specificity averaged across the runs where
    // they were defined (the Figs 2-4 series).
    std::vector<ClassMetrics> per_class_mean;
    std::vector<std::string> class_names;
    // DNN only: per-epoch mean loss of the first run.
    std::vector<double> first_run_loss;
    ExperimentConfig config_echo;
};

struct ComparisonReport {
    ExperimentConfig config;
    std::vector<EvaluationReport> models;
};

/// The repeated-holdout protocol for one model: per run, derive the run
/// seed, stratified-split, fit the normalizer on train, fit the model on
/// normalized train, evaluate on normalized test.
EvaluationReport run_experiment(const Dataset& d, const ExperimentConfig& cfg,
                                const ModelSpec& spec);

/// Runs every configured model over identical split sequences and collects
/// the accuracy/Kappa tables plus per-class series.
ComparisonReport compare_models(const Dataset& d, const ExperimentConfig& cfg);

}  // namespace croppat
