#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace croppat {

/// One labeled observation: a feature vector (NDVI-like values) plus a
/// class index into the owning dataset's class_names.
struct Sample {
    std::vector<double> features;
    int label = 0;
};

struct Dataset {
    std::vector<Sample> samples;
    std::vector<std::string> class_names;
    std::size_t feature_count = 0;

    std::size_t size() const { return samples.size(); }
    int class_count() const { return static_cast<int>(class_names.size()); }

    /// Per-class sample counts, indexed by label.
    std::vector<std::size_t> class_counts() const;

    /// Throws DataError if any sample violates the container invariants
    /// (feature arity, label range).
    void validate() const;
};

struct SplitSpec {
    double train_fraction = 0.70;
    std::uint64_t seed = 0;
};

struct SyntheticSpec {
    int class_count = 8;
    std::size_t feature_count = 136;
    std::size_t samples_per_class = 50;
    double noise_sigma = 0.02;
    std::uint64_t seed = 0;
};

/// Per-feature min-max scaling fitted on training data only. Applying to
/// other data may produce values outside [0,1]; they are not clamped.
struct Normalizer {
    std::vector<double> mins;
    std::vector<double> maxs;

    Dataset apply(const Dataset& d) const;
    std::vector<double> apply_row(std::span<const double> x) const;
};

/// Reads the fixed CSV schema: header `f0,...,f{F-1},label`, then one row
/// per sample with F finite numeric fields and a class name. Class names
/// are registered in first-appearance order. Errors name the 1-based file
/// line that caused them.
Dataset load_csv(const std::string& path);

/// Writes the same schema with `\n` line endings and shortest round-trip
/// float formatting, so load_csv(write_csv(d)) reproduces d exactly.
void write_csv(const Dataset& d, const std::string& path);

/// Seeded per-class partition. Each class with n_c samples contributes
/// round(train_fraction * n_c) samples to train, clamped so both sides
/// keep at least one. Samples keep their original relative order.
std::pair<Dataset, Dataset> stratified_split(const Dataset& d, const SplitSpec& spec);

Normalizer fit_normalizer(const Dataset& train);

/// Noise-free seasonal NDVI prototype of class k: a double-logistic curve
/// (green-up sigmoid minus senescence sigmoid) whose timing, steepness,
/// baseline and amplitude vary deterministically with the class index.
std::vector<double> synthetic_prototype(int k, const SyntheticSpec& spec);

/// Balanced synthetic dataset: samples_per_class draws per class, each the
/// class prototype plus i.i.d. Gaussian noise of spec.noise_sigma.
/// Bit-identical under equal seeds.
Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace croppat
