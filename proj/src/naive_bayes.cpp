#include "croppat/naive_bayes.hpp"

#include <algorithm>
#include <cmath>

#include "croppat/error.hpp"

namespace croppat {

NBModel NBModel::fit(const Dataset& train) {
    if (train.samples.empty()) throw DataError("nb fit: empty training set");
    train.validate();

    const int k = train.class_count();
    const std::size_t f = train.feature_count;
    auto counts = train.class_counts();
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0)
            throw DataError("nb fit: class '" + train.class_names[static_cast<std::size_t>(c)] +
                            "' has no training samples");
    }

    NBModel m;
    m.class_names = train.class_names;
    m.priors.resize(static_cast<std::size_t>(k));
    m.means.assign(static_cast<std::size_t>(k), std::vector<double>(f, 0.0));
    m.variances.assign(static_cast<std::size_t>(k), std::vector<double>(f, 0.0));

    for (const auto& s : train.samples) {
        auto c = static_cast<std::size_t>(s.label);
        for (std::size_t i = 0; i < f; ++i) m.means[c][i] += s.features[i];
    }
    for (int c = 0; c < k; ++c) {
        auto cu = static_cast<std::size_t>(c);
        double n_c = static_cast<double>(counts[cu]);
        m.priors[cu] = n_c / static_cast<double>(train.size());
        for (std::size_t i = 0; i < f; ++i) m.means[cu][i] /= n_c;
    }
    for (const auto& s : train.samples) {
        auto c = static_cast<std::size_t>(s.label);
        for (std::size_t i = 0; i < f; ++i) {
            double d = s.features[i] - m.means[c][i];
            m.variances[c][i] += d * d;
        }
    }
    for (int c = 0; c < k; ++c) {
        auto cu = static_cast<std::size_t>(c);
        double n_c = static_cast<double>(counts[cu]);
        for (std::size_t i = 0; i < f; ++i)
            m.variances[cu][i] = std::max(m.variances[cu][i] / n_c, kVarianceFloor);
    }
    return m;
}

std::vector<double> NBModel::posterior(std::span<const double> x) const {
    if (x.size() != feature_count())
        throw DataError("nb posterior: input has " + std::to_string(x.size()) +
                        " features, model expects " + std::to_string(feature_count()));

    const auto k = priors.size();
    std::vector<double> log_joint(k);
    for (std::size_t c = 0; c < k; ++c) {
        double lp = std::log(priors[c]);
        for (std::size_t i = 0; i < x.size(); ++i) {
            double v = variances[c][i];
            double d = x[i] - means[c][i];
            lp += -0.5 * std::log(2.0 * M_PI * v) - d * d / (2.0 * v);
        }
        log_joint[c] = lp;
    }

    double max_lp = *std::max_element(log_joint.begin(), log_joint.end());
    double z = 0.0;
    std::vector<double> post(k);
    for (std::size_t c = 0; c < k; ++c) {
        post[c] = std::exp(log_joint[c] - max_lp);
        z += post[c];
    }
    for (auto& p : post) p /= z;
    return post;
}

int NBModel::predict(std::span<const double> x) const {
    auto post = posterior(x);
    int best = 0;
    for (int c = 1; c < static_cast<int>(post.size()); ++c)
        if (post[static_cast<std::size_t>(c)] > post[static_cast<std::size_t>(best)]) best = c;
    return best;
}

}  // namespace croppat
