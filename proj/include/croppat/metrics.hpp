#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace croppat {

/// K x K count grid; rows are true classes, columns are predicted classes.
struct ConfusionMatrix {
    std::vector<std::vector<std::uint64_t>> counts;
    std::vector<std::string> class_names;

    int class_count() const { return static_cast<int>(counts.size()); }
    std::uint64_t total() const;
};

/// Tallies truth/prediction pairs. Both sequences must have equal nonzero
/// length and labels in 0..K-1.
ConfusionMatrix confusion(const std::vector<int>& truth, const std::vector<int>& pred,
                          const std::vector<std::string>& class_names);

/// Trace over total.
double accuracy(const ConfusionMatrix& cm);

/// Cohen's Kappa (P0 - Pe) / (1 - Pe) with Pe from the product of row and
/// column marginals. Absent when Pe = 1 (all counts in one diagonal cell).
std::optional<double> kappa(const ConfusionMatrix& cm);

/// Band name for a Kappa value:
///   <= 0 equivalent to chance, (0,0.21) slight, [0.21,0.41) fair,
///   [0.41,0.61) moderate, [0.61,0.81) substantial, [0.81,1) nearly
///   perfect, 1 perfect.
/// Band gaps (e.g. 0.205) close downward into the lower band.
std::string kappa_band(double kappa_value);

/// One-vs-rest TP/(TP+FN) for class k; absent when the class has no true
/// instances.
std::optional<double> sensitivity(const ConfusionMatrix& cm, int k);

/// One-vs-rest TN/(TN+FP) for class k; absent when TN+FP is zero.
std::optional<double> specificity(const ConfusionMatrix& cm, int k);

struct ClassMetrics {
    std::optional<double> sensitivity;
    std::optional<double> specificity;
};

struct MetricSet {
    double accuracy = 0.0;
    std::optional<double> kappa;
    std::optional<std::string> kappa_band;
    std::vector<ClassMetrics> per_class;
};

MetricSet compute_metrics(const ConfusionMatrix& cm);

}  // namespace croppat
