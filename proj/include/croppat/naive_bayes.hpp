#pragma once

#include <span>
#include <string>
#include <vector>

#include "croppat/dataset.hpp"

namespace croppat {

/// Gaussian Naive Bayes: class priors plus an independent per-feature
/// Gaussian likelihood per class. Immutable after fit; prediction is pure.
struct NBModel {
    /// Per-class per-feature variances are clamped from below so constant
    /// features cannot zero out a likelihood.
    static constexpr double kVarianceFloor = 1e-9;

    std::vector<double> priors;               // K, sums to 1
    std::vector<std::vector<double>> means;   // K x F
    std::vector<std::vector<double>> variances;  // K x F, >= kVarianceFloor
    std::vector<std::string> class_names;

    int class_count() const { return static_cast<int>(priors.size()); }
    std::size_t feature_count() const { return means.empty() ? 0 : means[0].size(); }

    /// Priors from class relative frequencies; means and population
    /// variances per class and feature. Every declared class must appear.
    static NBModel fit(const Dataset& train);

    /// P(C_k | x) for all k: joint log-likelihoods accumulated in log
    /// space, exponentiated after max-subtraction, then normalized.
    std::vector<double> posterior(std::span<const double> x) const;

    /// Argmax of posterior; ties break to the lowest class index.
    int predict(std::span<const double> x) const;
};

}  // namespace croppat
