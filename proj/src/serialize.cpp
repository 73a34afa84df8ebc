#include "croppat/serialize.hpp"

#include <fstream>

#include "croppat/error.hpp"

namespace croppat {

namespace {

Json optional_number(const std::optional<double>& v) {
    return v ? Json(*v) : Json(nullptr);
}

template <typename Fn>
auto wrap_parse(const std::string& what, Fn&& fn) {
    try {
        return fn();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed " + what + ": " + e.what());
    }
}

}  // namespace

Json nb_to_json(const NBModel& m) {
    Json j;
    j["priors"] = m.priors;
    j["means"] = m.means;
    j["variances"] = m.variances;
    j["class_names"] = m.class_names;
    return j;
}

NBModel nb_from_json(const nlohmann::json& j) {
    return wrap_parse("naive bayes model", [&] {
        NBModel m;
        m.priors = j.at("priors").get<std::vector<double>>();
        m.means = j.at("means").get<std::vector<std::vector<double>>>();
        m.variances = j.at("variances").get<std::vector<std::vector<double>>>();
        m.class_names = j.at("class_names").get<std::vector<std::string>>();
        if (m.means.size() != m.priors.size() || m.variances.size() != m.priors.size() ||
            m.class_names.size() != m.priors.size())
            throw DataError("naive bayes model: class dimensions disagree");
        for (std::size_t c = 0; c < m.means.size(); ++c)
            if (m.means[c].size() != m.feature_count() ||
                m.variances[c].size() != m.feature_count())
                throw DataError("naive bayes model: feature dimensions disagree");
        return m;
    });
}

Json forest_to_json(const ForestModel& m) {
    Json j;
    j["class_names"] = m.class_names;
    j["feature_count"] = m.feature_count;
    j["oob_error"] = m.oob_error;
    Json trees = Json::array();
    for (const auto& tree : m.trees) {
        Json nodes = Json::array();
        for (const auto& node : tree.nodes) {
            if (node.feature < 0) {
                nodes.push_back(Json{{"leaf", node.leaf_class}});
            } else {
                nodes.push_back(Json{{"feature", node.feature},
                                     {"threshold", node.threshold},
                                     {"left", node.left},
                                     {"right", node.right}});
            }
        }
        trees.push_back(Json{{"nodes", std::move(nodes)}});
    }
    j["trees"] = std::move(trees);
    j["in_bag_counts"] = m.in_bag_counts;
    return j;
}

ForestModel forest_from_json(const nlohmann::json& j) {
    return wrap_parse("forest model", [&] {
        ForestModel m;
        m.class_names = j.at("class_names").get<std::vector<std::string>>();
        m.feature_count = j.at("feature_count").get<std::size_t>();
        m.oob_error = j.at("oob_error").get<double>();
        for (const auto& jt : j.at("trees")) {
            Tree tree;
            for (const auto& jn : jt.at("nodes")) {
                TreeNode node;
                if (jn.contains("leaf")) {
                    node.leaf_class = jn.at("leaf").get<int>();
                    if (node.leaf_class < 0 ||
                        node.leaf_class >= static_cast<int>(m.class_names.size()))
                        throw DataError("forest model: leaf class out of range");
                } else {
                    node.feature = jn.at("feature").get<int>();
                    node.threshold = jn.at("threshold").get<double>();
                    node.left = jn.at("left").get<int>();
                    node.right = jn.at("right").get<int>();
                    if (node.feature < 0 ||
                        static_cast<std::size_t>(node.feature) >= m.feature_count)
                        throw DataError("forest model: split feature out of range");
                }
                tree.nodes.push_back(node);
            }
            auto node_count = static_cast<int>(tree.nodes.size());
            if (node_count == 0) throw DataError("forest model: empty tree");
            for (const auto& node : tree.nodes) {
                if (node.feature < 0) continue;
                if (node.left <= 0 || node.left >= node_count || node.right <= 0 ||
                    node.right >= node_count)
                    throw DataError("forest model: child index out of range");
            }
            m.trees.push_back(std::move(tree));
        }
        m.in_bag_counts = j.at("in_bag_counts").get<std::vector<std::vector<std::uint32_t>>>();
        return m;
    });
}

Json net_to_json(const NetModel& m) {
    Json j;
    j["layer_sizes"] = m.arch.layer_sizes;
    Json layers = Json::array();
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        const Matrix& w = m.weights[l];
        Json rows = Json::array();
        for (std::size_t r = 0; r < w.rows; ++r) {
            Json row = Json::array();
            for (std::size_t c = 0; c < w.cols; ++c) row.push_back(w.at(r, c));
            rows.push_back(std::move(row));
        }
        layers.push_back(Json{{"weights", std::move(rows)}, {"bias", m.biases[l]}});
    }
    j["layers"] = std::move(layers);
    return j;
}

NetModel net_from_json(const nlohmann::json& j) {
    return wrap_parse("net model", [&] {
        NetModel m;
        m.arch.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
        m.arch.validate();
        const auto& sizes = m.arch.layer_sizes;
        if (j.at("layers").size() != sizes.size() - 1)
            throw DataError("net model: layer count does not match layer_sizes");
        std::size_t l = 0;
        for (const auto& jl : j.at("layers")) {
            auto rows = jl.at("weights").get<std::vector<std::vector<double>>>();
            auto fan_out = static_cast<std::size_t>(sizes[l + 1]);
            auto fan_in = static_cast<std::size_t>(sizes[l]);
            if (rows.size() != fan_out)
                throw DataError("net model: weight rows do not match layer_sizes");
            Matrix w(fan_out, fan_in);
            for (std::size_t r = 0; r < w.rows; ++r) {
                if (rows[r].size() != fan_in) throw DataError("net model: ragged weight matrix");
                for (std::size_t c = 0; c < w.cols; ++c) w.at(r, c) = rows[r][c];
            }
            m.weights.push_back(std::move(w));
            auto bias = jl.at("bias").get<std::vector<double>>();
            if (bias.size() != fan_out)
                throw DataError("net model: bias length does not match layer_sizes");
            m.biases.push_back(std::move(bias));
            ++l;
        }
        return m;
    });
}

Json normalizer_to_json(const Normalizer& n) {
    return Json{{"min", n.mins}, {"max", n.maxs}};
}

Normalizer normalizer_from_json(const nlohmann::json& j) {
    return wrap_parse("normalizer", [&] {
        Normalizer n;
        n.mins = j.at("min").get<std::vector<double>>();
        n.maxs = j.at("max").get<std::vector<double>>();
        return n;
    });
}

Json metric_set_to_json(const MetricSet& m, const std::vector<std::string>& class_names) {
    Json j;
    j["accuracy"] = m.accuracy;
    j["kappa"] = optional_number(m.kappa);
    j["kappa_band"] = m.kappa_band ? Json(*m.kappa_band) : Json(nullptr);
    Json per_class = Json::array();
    for (std::size_t c = 0; c < m.per_class.size(); ++c) {
        per_class.push_back(Json{{"class", class_names[c]},
                                 {"sensitivity", optional_number(m.per_class[c].sensitivity)},
                                 {"specificity", optional_number(m.per_class[c].specificity)}});
    }
    j["per_class"] = std::move(per_class);
    return j;
}

namespace {

Json model_spec_to_json(const ModelSpec& spec) {
    Json j;
    j["name"] = spec.name();
    switch (spec.kind) {
        case ModelKind::NB:
            break;
        case ModelKind::RF:
            j["ntree"] = spec.forest.ntree;
            j["mtry"] = spec.forest.mtry;
            j["max_depth"] = spec.forest.max_depth;
            j["min_node_size"] = spec.forest.min_node_size;
            break;
        case ModelKind::DNN:
            j["layer_sizes"] = spec.arch.layer_sizes;
            j["epochs"] = spec.net.epochs;
            j["batch_size"] = spec.net.batch_size;
            j["learning_rate"] = spec.net.learning_rate;
            break;
    }
    return j;
}

}  // namespace

Json comparison_to_json(const ComparisonReport& report, bool include_timing) {
    Json j;

    Json config;
    config["train_fraction"] = report.config.train_fraction;
    config["repeats"] = report.config.repeats;
    config["seed"] = report.config.master_seed;
    Json model_specs = Json::array();
    for (const auto& spec : report.config.models) model_specs.push_back(model_spec_to_json(spec));
    config["models"] = std::move(model_specs);
    j["config"] = std::move(config);

    Json models = Json::array();
    for (const auto& m : report.models) {
        Json jm;
        jm["name"] = m.model;
        Json runs = Json::array();
        for (const auto& r : m.runs) runs.push_back(metric_set_to_json(r, m.class_names));
        jm["runs"] = std::move(runs);
        Json agg;
        agg["accuracy"] = Json{{"mean", optional_number(m.accuracy.mean)},
                               {"sd", optional_number(m.accuracy.sd)}};
        agg["kappa"] = Json{{"mean", optional_number(m.kappa.mean)},
                            {"sd", optional_number(m.kappa.sd)}};
        jm["aggregate"] = std::move(agg);
        if (include_timing) {
            double total = 0.0;
            for (double s : m.seconds) total += s;
            jm["seconds_per_run"] = m.seconds.empty()
                                        ? Json(nullptr)
                                        : Json(total / static_cast<double>(m.seconds.size()));
        } else {
            jm["seconds_per_run"] = nullptr;
        }
        models.push_back(std::move(jm));
    }
    j["models"] = std::move(models);

    Json accuracy_table = Json::array();
    Json kappa_table = Json::array();
    for (const auto& m : report.models) {
        accuracy_table.push_back(
            Json{{"model", m.model}, {"accuracy", optional_number(m.accuracy.mean)}});
        kappa_table.push_back(Json{{"model", m.model},
                                   {"kappa", optional_number(m.kappa.mean)},
                                   {"band", m.kappa.mean ? Json(kappa_band(*m.kappa.mean))
                                                         : Json(nullptr)}});
    }
    j["tables"] = Json{{"accuracy", std::move(accuracy_table)}, {"kappa", std::move(kappa_table)}};

    Json series;
    for (const auto& m : report.models) {
        Json rows = Json::array();
        for (std::size_t c = 0; c < m.per_class_mean.size(); ++c) {
            rows.push_back(Json{{"class", m.class_names[c]},
                                {"sensitivity", optional_number(m.per_class_mean[c].sensitivity)},
                                {"specificity", optional_number(m.per_class_mean[c].specificity)}});
        }
        series[m.model] = std::move(rows);
    }
    j["per_class_series"] = std::move(series);
    return j;
}

int TrainedModel::predict(std::span<const double> x) const {
    auto z = normalizer.apply_row(x);
    if (nb) return nb->predict(z);
    if (rf) return rf->predict(z);
    if (dnn) return dnn->predict(z);
    throw DataError("trained model holds no classifier");
}

void save_model(const TrainedModel& m, const std::string& path) {
    Json j;
    j["type"] = m.type;
    j["feature_count"] = m.feature_count;
    j["class_names"] = m.class_names;
    j["normalizer"] = normalizer_to_json(m.normalizer);
    if (m.nb) j["model"] = nb_to_json(*m.nb);
    if (m.rf) j["model"] = forest_to_json(*m.rf);
    if (m.dnn) j["model"] = net_to_json(*m.dnn);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw DataError("write failed: " + path);
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
    return wrap_parse("model file " + path, [&] {
        TrainedModel m;
        m.type = j.at("type").get<std::string>();
        m.feature_count = j.at("feature_count").get<std::size_t>();
        m.class_names = j.at("class_names").get<std::vector<std::string>>();
        m.normalizer = normalizer_from_json(j.at("normalizer"));
        if (m.type == "nb") {
            m.nb = nb_from_json(j.at("model"));
        } else if (m.type == "rf") {
            m.rf = forest_from_json(j.at("model"));
        } else if (m.type == "dnn") {
            m.dnn = net_from_json(j.at("model"));
        } else {
            throw DataError(path + ": unknown model type '" + m.type + "'");
        }
        return m;
    });
}

}  // namespace croppat
