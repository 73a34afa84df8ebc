#include "croppat/metrics.hpp"

#include "croppat/error.hpp"

namespace croppat {

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t n = 0;
    for (const auto& row : counts)
        for (auto c : row) n += c;
    return n;
}

ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred,
                          const std::vector<std::string>& class_names) {
    if (truth.size() != pred.size())
        throw DataError("confusion: truth has " + std::to_string(truth.size()) +
                        " labels, predictions have " + std::to_string(pred.size()));
    if (truth.empty()) throw DataError("confusion: empty label sequences");

    const int k = static_cast<int>(class_names.size());
    ConfusionMatrix cm;
    cm.class_names = class_names;
    cm.counts.assign(static_cast<std::size_t>(k),
                     std::vector<std::uint64_t>(static_cast<std::size_t>(k), 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= k)
            throw DataError("confusion: truth label " + std::to_string(truth[i]) +
                            " at position " + std::to_string(i) + " outside 0.." +
                            std::to_string(k - 1));
        if (pred[i] < 0 || pred[i] >= k)
            throw DataError("confusion: predicted label " + std::to_string(pred[i]) +
                            " at position " + std::to_string(i) + " outside 0.." +
                            std::to_string(k - 1));
        cm.counts[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(pred[i])]++;
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    std::uint64_t n = cm.total();
    if (n == 0) throw DataError("accuracy: empty confusion matrix");
    std::uint64_t diag = 0;
    for (int i = 0; i < cm.class_count(); ++i)
        diag += cm.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    return static_cast<double>(diag) / static_cast<double>(n);
}

std::optional<double> kappa(const ConfusionMatrix& cm) {
    const auto n = static_cast<double>(cm.total());
    if (n == 0.0) throw DataError("kappa: empty confusion matrix");
    const int k = cm.class_count();

    double diag = 0.0;
    std::vector<double> row_sum(static_cast<std::size_t>(k), 0.0);
    std::vector<double> col_sum(static_cast<std::size_t>(k), 0.0);
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) {
            double v = static_cast<double>(cm.counts[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
            row_sum[static_cast<std::size_t>(r)] += v;
            col_sum[static_cast<std::size_t>(c)] += v;
            if (r == c) diag += v;
        }
    }

    double p_observed = diag / n;
    double p_expected = 0.0;
    for (int i = 0; i < k; ++i)
        p_expected += row_sum[static_cast<std::size_t>(i)] * col_sum[static_cast<std::size_t>(i)] / (n * n);

    if (p_expected >= 1.0) return std::nullopt;
    return (p_observed - p_expected) / (1.0 - p_expected);
}

std::string kappa_band(double kappa_value) {
    if (kappa_value >= 1.0) return "perfect";
    if (kappa_value >= 0.81) return "nearly perfect";
    if (kappa_value >= 0.61) return "substantial";
    if (kappa_value >= 0.41) return "moderate";
    if (kappa_value >= 0.21) return "fair";
    if (kappa_value > 0.0) return "slight";
    return "equivalent to chance";
}

namespace {

struct OneVsRest {
    double tp, fn, fp, tn;
};

OneVsRest collapse(const ConfusionMatrix& cm, int k) {
    if (k < 0 || k >= cm.class_count())
        throw DataError("class index " + std::to_string(k) + " outside 0.." +
                        std::to_string(cm.class_count() - 1));
    const auto ku = static_cast<std::size_t>(k);
    double tp = static_cast<double>(cm.counts[ku][ku]);
    double row = 0.0, col = 0.0;
    for (int i = 0; i < cm.class_count(); ++i) {
        row += static_cast<double>(cm.counts[ku][static_cast<std::size_t>(i)]);
        col += static_cast<double>(cm.counts[static_cast<std::size_t>(i)][ku]);
    }
    double n = static_cast<double>(cm.total());
    double fn = row - tp;
    double fp = col - tp;
    double tn = n - tp - fn - fp;
    return {tp, fn, fp, tn};
}

}  // namespace

std::optional<double> sensitivity(const ConfusionMatrix& cm, int k) {
    auto c = collapse(cm, k);
    if (c.tp + c.fn == 0.0) return std::nullopt;
    return c.tp / (c.tp + c.fn);
}

std::optional<double> specificity(const ConfusionMatrix& cm, int k) {
    auto c = collapse(cm, k);
    if (c.tn + c.fp == 0.0) return std::nullopt;
    return c.tn / (c.tn + c.fp);
}

MetricSet compute_metrics(const ConfusionMatrix& cm) {
    MetricSet m;
    m.accuracy = accuracy(cm);
    m.kappa = kappa(cm);
    if (m.kappa) m.kappa_band = kappa_band(*m.kappa);
    for (int k = 0; k < cm.class_count(); ++k)
        m.per_class.push_back({sensitivity(cm, k), specificity(cm, k)});
    return m;
}

}  // namespace croppat
