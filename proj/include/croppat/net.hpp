#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "croppat/dataset.hpp"

namespace croppat {

/// Layer widths from input to output, e.g. {136, 68, 32, 8}.
struct NetArch {
    std::vector<int> layer_sizes{136, 68, 32, 8};

    void validate() const;
    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }

    bool operator==(const NetArch&) const = default;
};

struct TrainConfig {
    int epochs = 200;
    int batch_size = 32;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
};

/// Dense row-major matrix, just enough linear algebra for this network.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

    bool operator==(const Matrix&) const = default;
};

/// Numerically stable softmax (max subtracted before exponentiation).
std::vector<double> softmax(std::span<const double> logits);

/// Feedforward network: affine + ReLU on hidden layers, affine + softmax
/// on the output layer. Immutable outside net_train; forward/predict are
/// pure.
struct NetModel {
    NetArch arch;
    std::vector<Matrix> weights;             // layer l: arch[l+1] x arch[l]
    std::vector<std::vector<double>> biases;  // layer l: arch[l+1]

    /// He initialization: weights ~ N(0, 2/fan_in) drawn row-major layer
    /// by layer from the frozen generator, biases zero.
    static NetModel init(const NetArch& arch, std::uint64_t seed);

    /// Class probabilities for one input.
    std::vector<double> forward(std::span<const double> x) const;

    /// Argmax of forward; ties break to the lowest class index.
    int predict(std::span<const double> x) const;

    bool operator==(const NetModel&) const = default;
};

/// Gradients of mean cross-entropy over a batch, shaped like the model.
/// ReLU subgradient at exactly 0 is taken as 0.
struct NetGradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    double mean_loss = 0.0;
};

NetGradients net_gradients(const NetModel& m, std::span<const Sample> batch);

/// Mean cross-entropy -log p(label) over the batch, via log-sum-exp.
double net_loss(const NetModel& m, std::span<const Sample> batch);

struct NetTrainResult {
    NetModel model;
    std::vector<double> epoch_loss;  // mean per-sample loss of each epoch
};

/// Mini-batch SGD: per epoch, a seeded shuffle, batches of batch_size
/// (last one may be short), update = params - learning_rate * gradient.
/// Throws NumericError naming the epoch if the loss turns non-finite.
NetTrainResult net_train(NetModel m, const Dataset& train, const TrainConfig& cfg);

}  // namespace croppat
