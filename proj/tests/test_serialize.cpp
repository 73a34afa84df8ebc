#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "croppat/error.hpp"
#include "croppat/serialize.hpp"

using namespace croppat;

namespace {

Dataset toy_data() {
    SyntheticSpec spec;
    spec.class_count = 3;
    spec.feature_count = 6;
    spec.samples_per_class = 8;
    spec.noise_sigma = 0.05;
    spec.seed = 17;
    return generate_synthetic(spec);
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / name).string()) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("serialize: nb model round-trips and predicts identically") {
    Dataset d = toy_data();
    auto m = NBModel::fit(d);
    auto restored = nb_from_json(nlohmann::json::parse(nb_to_json(m).dump()));
    CHECK(restored.priors == m.priors);
    CHECK(restored.means == m.means);
    CHECK(restored.variances == m.variances);
    CHECK(restored.class_names == m.class_names);
    for (const auto& s : d.samples)
        CHECK(restored.predict(s.features) == m.predict(s.features));
}

TEST_CASE("serialize: forest model round-trips exactly") {
    Dataset d = toy_data();
    ForestParams p;
    p.ntree = 9;
    p.mtry = 2;
    p.seed = 5;
    auto m = ForestModel::fit(d, p);
    auto restored = forest_from_json(nlohmann::json::parse(forest_to_json(m).dump()));
    CHECK(restored == m);
}

TEST_CASE("serialize: net model round-trips exactly") {
    NetArch arch;
    arch.layer_sizes = {6, 4, 3};
    auto m = NetModel::init(arch, 33);
    auto restored = net_from_json(nlohmann::json::parse(net_to_json(m).dump()));
    CHECK(restored == m);
}

TEST_CASE("serialize: metric set schema has the fixed keys") {
    auto cm = confusion({0, 1, 1, 0}, {0, 1, 0, 0}, {"a", "b"});
    auto j = metric_set_to_json(compute_metrics(cm), cm.class_names);
    CHECK(j.contains("accuracy"));
    CHECK(j.contains("kappa"));
    CHECK(j.contains("kappa_band"));
    REQUIRE(j.contains("per_class"));
    REQUIRE(j["per_class"].size() == 2);
    CHECK(j["per_class"][0].contains("class"));
    CHECK(j["per_class"][0].contains("sensitivity"));
    CHECK(j["per_class"][0].contains("specificity"));

    // absent metrics render as null
    auto degenerate = confusion({0, 0}, {0, 0}, {"a", "b"});
    auto jd = metric_set_to_json(compute_metrics(degenerate), degenerate.class_names);
    CHECK(jd["per_class"][1]["sensitivity"].is_null());
}

TEST_CASE("serialize: comparison report schema and timing redaction") {
    Dataset d = toy_data();
    ExperimentConfig cfg;
    cfg.repeats = 2;
    cfg.master_seed = 3;
    ModelSpec nb;
    nb.kind = ModelKind::NB;
    ModelSpec rf;
    rf.kind = ModelKind::RF;
    rf.forest.ntree = 7;
    rf.forest.mtry = 2;
    cfg.models = {nb, rf};

    auto report = compare_models(d, cfg);
    auto j = comparison_to_json(report);

    REQUIRE(j.contains("config"));
    CHECK(j["config"]["repeats"] == 2);
    REQUIRE(j.contains("models"));
    REQUIRE(j["models"].size() == 2);
    CHECK(j["models"][0]["name"] == "NB");
    CHECK(j["models"][0]["runs"].size() == 2);
    CHECK(j["models"][0]["aggregate"].contains("accuracy"));
    CHECK(j["models"][0]["seconds_per_run"].is_null());  // deterministic output

    auto timed = comparison_to_json(report, true);
    CHECK(timed["models"][0]["seconds_per_run"].is_number());

    REQUIRE(j.contains("tables"));
    REQUIRE(j["tables"]["accuracy"].size() == 2);
    CHECK(j["tables"]["accuracy"][0].contains("model"));
    CHECK(j["tables"]["accuracy"][0].contains("accuracy"));
    REQUIRE(j["tables"]["kappa"].size() == 2);
    CHECK(j["tables"]["kappa"][1].contains("kappa"));
    CHECK(j["tables"]["kappa"][1].contains("band"));

    REQUIRE(j.contains("per_class_series"));
    CHECK(j["per_class_series"].contains("NB"));
    CHECK(j["per_class_series"].contains("RF"));
    CHECK(j["per_class_series"]["NB"].size() == 3);
}

TEST_CASE("serialize: trained model bundle saves, loads and predicts") {
    Dataset raw = toy_data();
    Normalizer norm = fit_normalizer(raw);
    Dataset train = norm.apply(raw);

    TrainedModel bundle;
    bundle.type = "nb";
    bundle.feature_count = train.feature_count;
    bundle.class_names = train.class_names;
    bundle.normalizer = norm;
    bundle.nb = NBModel::fit(train);

    TempFile file("croppat_model.json");
    save_model(bundle, file.path);
    auto loaded = load_model(file.path);
    CHECK(loaded.type == "nb");
    CHECK(loaded.class_names == bundle.class_names);
    for (const auto& s : raw.samples)
        CHECK(loaded.predict(s.features) == bundle.predict(s.features));
}

TEST_CASE("serialize: model loading errors") {
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), DataError);

    TempFile bad_json("croppat_badmodel.json");
    {
        std::ofstream out(bad_json.path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_model(bad_json.path), DataError);

    TempFile bad_type("croppat_badtype.json");
    {
        std::ofstream out(bad_type.path);
        out << R"({"type":"svm","feature_count":2,"class_names":["a"],)"
            << R"("normalizer":{"min":[0,0],"max":[1,1]},"model":{}})";
    }
    CHECK_THROWS_WITH_AS(load_model(bad_type.path), doctest::Contains("svm"), DataError);
}
