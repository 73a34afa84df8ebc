#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "croppat/dataset.hpp"
#include "croppat/forest.hpp"
#include "croppat/harness.hpp"
#include "croppat/metrics.hpp"
#include "croppat/naive_bayes.hpp"
#include "croppat/net.hpp"

namespace croppat {

using Json = nlohmann::ordered_json;

Json nb_to_json(const NBModel& m);
NBModel nb_from_json(const nlohmann::json& j);

Json forest_to_json(const ForestModel& m);
ForestModel forest_from_json(const nlohmann::json& j);

Json net_to_json(const NetModel& m);
NetModel net_from_json(const nlohmann::json& j);

Json normalizer_to_json(const Normalizer& n);
Normalizer normalizer_from_json(const nlohmann::json& j);

/// Fixed MetricSet schema:
/// {accuracy, kappa, kappa_band, per_class:[{class, sensitivity, specificity}]}
/// Absent metrics are emitted as null.
Json metric_set_to_json(const MetricSet& m, const std::vector<std::string>& class_names);

/// Fixed ComparisonReport schema:
/// {config, models:[{name, runs, aggregate, seconds_per_run}],
///  tables:{accuracy, kappa}, per_class_series:{model: [...]}}
/// Wall times vary between invocations, so seconds_per_run is emitted as
/// null unless include_timing is set; everything else is byte-reproducible
/// for a fixed dataset and config.
Json comparison_to_json(const ComparisonReport& report, bool include_timing = false);

/// A fitted classifier bundled with its training-side normalizer, as
/// written by `croppat train` and consumed by `croppat evaluate`.
struct TrainedModel {
    std::string type;  // "nb" | "rf" | "dnn"
    std::size_t feature_count = 0;
    std::vector<std::string> class_names;
    Normalizer normalizer;
    std::optional<NBModel> nb;
    std::optional<ForestModel> rf;
    std::optional<NetModel> dnn;

    /// Normalizes the raw feature vector and predicts a class index.
    int predict(std::span<const double> x) const;
};

void save_model(const TrainedModel& m, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace croppat
