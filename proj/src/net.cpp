#include "croppat/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "croppat/error.hpp"
#include "croppat/rng.hpp"

namespace croppat {

namespace {

struct ForwardTrace {
    // activations[0] is the input; activations[l+1] = relu(z[l]) for
    // hidden layers and the raw logits for the output layer.
    std::vector<std::vector<double>> activations;
};

ForwardTrace trace_forward(const NetModel& m, std::span<const double> x) {
    ForwardTrace t;
    t.activations.emplace_back(x.begin(), x.end());
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        const Matrix& w = m.weights[l];
        const auto& prev = t.activations.back();
        std::vector<double> z(w.rows);
        for (std::size_t r = 0; r < w.rows; ++r) {
            double acc = m.biases[l][r];
            const double* row = &w.a[r * w.cols];
            for (std::size_t c = 0; c < w.cols; ++c) acc += row[c] * prev[c];
            z[r] = acc;
        }
        bool is_output = l + 1 == m.weights.size();
        if (!is_output)
            for (auto& v : z) v = std::max(0.0, v);
        t.activations.push_back(std::move(z));
    }
    return t;
}

double log_sum_exp(std::span<const double> z) {
    double zmax = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - zmax);
    return zmax + std::log(s);
}

void check_input(const NetModel& m, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(m.arch.input_size()))
        throw DataError("net forward: input has " + std::to_string(x.size()) +
                        " features, model expects " + std::to_string(m.arch.input_size()));
}

}  // namespace

void NetArch::validate() const {
    if (layer_sizes.size() < 2)
        throw UsageError("net arch needs at least input and output layers");
    for (int s : layer_sizes)
        if (s < 1) throw UsageError("net arch layer sizes must be positive");
}

std::vector<double> softmax(std::span<const double> logits) {
    double zmax = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - zmax);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

NetModel NetModel::init(const NetArch& arch, std::uint64_t seed) {
    arch.validate();
    NetModel m;
    m.arch = arch;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < arch.layer_sizes.size(); ++l) {
        auto fan_in = static_cast<std::size_t>(arch.layer_sizes[l]);
        auto fan_out = static_cast<std::size_t>(arch.layer_sizes[l + 1]);
        double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
        Matrix w(fan_out, fan_in);
        for (auto& v : w.a) v = std_dev * rng.next_normal();
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(fan_out, 0.0);
    }
    return m;
}

std::vector<double> NetModel::forward(std::span<const double> x) const {
    check_input(*this, x);
    auto t = trace_forward(*this, x);
    return softmax(t.activations.back());
}

int NetModel::predict(std::span<const double> x) const {
    auto p = forward(x);
    int best = 0;
    for (int c = 1; c < static_cast<int>(p.size()); ++c)
        if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(best)]) best = c;
    return best;
}

NetGradients net_gradients(const NetModel& m, std::span<const Sample> batch) {
    if (batch.empty()) throw DataError("net gradients: empty batch");
    const auto layers = m.weights.size();
    const auto k = static_cast<std::size_t>(m.arch.output_size());

    NetGradients g;
    for (std::size_t l = 0; l < layers; ++l) {
        g.weights.emplace_back(m.weights[l].rows, m.weights[l].cols);
        g.biases.emplace_back(m.biases[l].size(), 0.0);
    }

    double loss_sum = 0.0;
    for (const auto& sample : batch) {
        check_input(m, sample.features);
        if (sample.label < 0 || static_cast<std::size_t>(sample.label) >= k)
            throw DataError("net gradients: label " + std::to_string(sample.label) +
                            " outside 0.." + std::to_string(k - 1));
        auto t = trace_forward(m, sample.features);
        const auto& logits = t.activations.back();
        loss_sum += log_sum_exp(logits) - logits[static_cast<std::size_t>(sample.label)];

        // Output residual: softmax - onehot.
        std::vector<double> delta = softmax(logits);
        delta[static_cast<std::size_t>(sample.label)] -= 1.0;

        for (std::size_t l = layers; l-- > 0;) {
            const auto& input = t.activations[l];
            Matrix& gw = g.weights[l];
            for (std::size_t r = 0; r < gw.rows; ++r) {
                g.biases[l][r] += delta[r];
                double* row = &gw.a[r * gw.cols];
                for (std::size_t c = 0; c < gw.cols; ++c) row[c] += delta[r] * input[c];
            }
            if (l == 0) break;
            const Matrix& w = m.weights[l];
            std::vector<double> prev_delta(w.cols, 0.0);
            for (std::size_t r = 0; r < w.rows; ++r) {
                const double* row = &w.a[r * w.cols];
                for (std::size_t c = 0; c < w.cols; ++c) prev_delta[c] += row[c] * delta[r];
            }
            // ReLU gate: hidden activation 0 means z <= 0, gradient 0.
            for (std::size_t c = 0; c < w.cols; ++c)
                if (input[c] <= 0.0) prev_delta[c] = 0.0;
            delta = std::move(prev_delta);
        }
    }

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (std::size_t l = 0; l < layers; ++l) {
        for (auto& v : g.weights[l].a) v *= inv_b;
        for (auto& v : g.biases[l]) v *= inv_b;
    }
    g.mean_loss = loss_sum * inv_b;
    return g;
}

double net_loss(const NetModel& m, std::span<const Sample> batch) {
    if (batch.empty()) throw DataError("net loss: empty batch");
    double loss_sum = 0.0;
    for (const auto& sample : batch) {
        check_input(m, sample.features);
        auto t = trace_forward(m, sample.features);
        const auto& logits = t.activations.back();
        loss_sum += log_sum_exp(logits) - logits[static_cast<std::size_t>(sample.label)];
    }
    return loss_sum / static_cast<double>(batch.size());
}

NetTrainResult net_train(NetModel m, const Dataset& train, const TrainConfig& cfg) {
    if (train.samples.empty()) throw DataError("net train: empty training set");
    train.validate();
    if (train.feature_count != static_cast<std::size_t>(m.arch.input_size()))
        throw DataError("net train: dataset has " + std::to_string(train.feature_count) +
                        " features, model expects " + std::to_string(m.arch.input_size()));
    if (train.class_count() != m.arch.output_size())
        throw DataError("net train: dataset has " + std::to_string(train.class_count()) +
                        " classes, model expects " + std::to_string(m.arch.output_size()));
    if (cfg.epochs < 0) throw UsageError("net train: epochs must be nonnegative");
    if (cfg.batch_size < 1) throw UsageError("net train: batch_size must be positive");
    if (cfg.learning_rate <= 0.0) throw UsageError("net train: learning_rate must be positive");

    NetTrainResult result;
    Rng rng(cfg.seed);
    const auto n = train.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<Sample> batch;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            auto stop = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
            batch.clear();
            for (std::size_t i = start; i < stop; ++i) batch.push_back(train.samples[order[i]]);

            auto g = net_gradients(m, batch);
            if (!std::isfinite(g.mean_loss))
                throw NumericError("net train: non-finite loss at epoch " + std::to_string(epoch));
            epoch_loss_sum += g.mean_loss * static_cast<double>(batch.size());

            for (std::size_t l = 0; l < m.weights.size(); ++l) {
                for (std::size_t i = 0; i < m.weights[l].a.size(); ++i)
                    m.weights[l].a[i] -= cfg.learning_rate * g.weights[l].a[i];
                for (std::size_t i = 0; i < m.biases[l].size(); ++i)
                    m.biases[l][i] -= cfg.learning_rate * g.biases[l][i];
            }
        }
        result.epoch_loss.push_back(epoch_loss_sum / static_cast<double>(n));
    }

    result.model = std::move(m);
    return result;
}

}  // namespace croppat
