#include "croppat/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "croppat/error.hpp"
#include "croppat/parallel.hpp"
#include "croppat/rng.hpp"

namespace croppat {

namespace {

int majority_class(const std::vector<std::uint32_t>& histogram) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(histogram.size()); ++c)
        if (histogram[static_cast<std::size_t>(c)] > histogram[static_cast<std::size_t>(best)])
            best = c;
    return best;
}

double gini(const std::vector<std::uint32_t>& histogram, double n) {
    double sum_sq = 0.0;
    for (auto c : histogram) sum_sq += static_cast<double>(c) * static_cast<double>(c);
    return 1.0 - sum_sq / (n * n);
}

struct BestSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double weighted_gini = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Dataset& train, const ForestParams& params, Rng& rng)
        : train_(train), params_(params), rng_(rng), k_(train.class_count()) {}

    Tree build(std::vector<std::uint32_t> bag_indices) {
        Tree tree;
        grow(tree, std::move(bag_indices), 0);
        return tree;
    }

private:
    // Appends the subtree for `idx` (training-sample indices, with bag
    // multiplicity) and returns its root node id. Children follow their
    // parent, so the arena is in preorder.
    int grow(Tree& tree, std::vector<std::uint32_t> idx, int depth) {
        std::vector<std::uint32_t> histogram(static_cast<std::size_t>(k_), 0);
        for (auto i : idx) histogram[static_cast<std::size_t>(train_.samples[i].label)]++;

        int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        bool pure = std::count_if(histogram.begin(), histogram.end(),
                                  [](std::uint32_t c) { return c > 0; }) <= 1;
        bool depth_capped = params_.max_depth > 0 && depth >= params_.max_depth;
        bool too_small = idx.size() < static_cast<std::size_t>(params_.min_node_size);

        BestSplit split;
        if (!pure && !depth_capped && !too_small) split = find_split(idx, histogram);

        if (!split.found) {
            tree.nodes[static_cast<std::size_t>(node_id)].leaf_class = majority_class(histogram);
            return node_id;
        }

        std::vector<std::uint32_t> left_idx, right_idx;
        for (auto i : idx) {
            if (train_.samples[i].features[static_cast<std::size_t>(split.feature)] <= split.threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        int left = grow(tree, std::move(left_idx), depth + 1);
        int right = grow(tree, std::move(right_idx), depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(node_id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = left;
        node.right = right;
        return node_id;
    }

    // Exact search over mtry features sampled without replacement and all
    // midpoint thresholds between consecutive distinct values. Features
    // are visited in ascending index order and thresholds in ascending
    // value order with strictly-better acceptance, so ties resolve to the
    // lowest feature index, then the lowest threshold.
    BestSplit find_split(const std::vector<std::uint32_t>& idx,
                         const std::vector<std::uint32_t>& histogram) {
        const auto f_total = train_.feature_count;
        std::vector<std::size_t> features(f_total);
        std::iota(features.begin(), features.end(), 0);
        const auto mtry = static_cast<std::size_t>(params_.mtry);
        for (std::size_t j = 0; j < mtry; ++j) {
            std::size_t pick = j + static_cast<std::size_t>(rng_.below(f_total - j));
            std::swap(features[j], features[pick]);
        }
        features.resize(mtry);
        std::sort(features.begin(), features.end());

        const double n = static_cast<double>(idx.size());
        const double parent = gini(histogram, n);

        BestSplit best;
        std::vector<std::pair<double, int>> vals(idx.size());
        std::vector<std::uint32_t> left_hist(static_cast<std::size_t>(k_));
        for (auto f : features) {
            for (std::size_t i = 0; i < idx.size(); ++i) {
                const auto& s = train_.samples[idx[i]];
                vals[i] = {s.features[f], s.label};
            }
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::fill(left_hist.begin(), left_hist.end(), 0);
            std::vector<std::uint32_t> right_hist = histogram;
            double sum_sq_left = 0.0;
            double sum_sq_right = 0.0;
            for (auto c : histogram)
                sum_sq_right += static_cast<double>(c) * static_cast<double>(c);

            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                auto c = static_cast<std::size_t>(vals[i].second);
                sum_sq_left += 2.0 * static_cast<double>(left_hist[c]) + 1.0;
                sum_sq_right -= 2.0 * static_cast<double>(right_hist[c]) - 1.0;
                left_hist[c]++;
                right_hist[c]--;

                if (vals[i + 1].first <= vals[i].first) continue;  // not a value boundary
                double lo = vals[i].first;
                double hi = vals[i + 1].first;
                double threshold = lo + (hi - lo) / 2.0;
                if (threshold >= hi) threshold = lo;  // midpoint rounded up to hi

                double n_left = static_cast<double>(i + 1);
                double n_right = n - n_left;
                double weighted = (n - sum_sq_left / n_left - sum_sq_right / n_right) / n;
                bool improves = weighted < parent - ForestParams::kMinImpurityDecrease;
                if (improves && (!best.found || weighted < best.weighted_gini)) {
                    best.found = true;
                    best.feature = static_cast<int>(f);
                    best.threshold = threshold;
                    best.weighted_gini = weighted;
                }
            }
        }
        return best;
    }

    const Dataset& train_;
    const ForestParams& params_;
    Rng& rng_;
    int k_;
};

}  // namespace

int Tree::route(std::span<const double> x) const {
    int id = 0;
    for (;;) {
        const auto& node = nodes[static_cast<std::size_t>(id)];
        if (node.feature < 0) return node.leaf_class;
        id = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
}

ForestModel ForestModel::fit(const Dataset& train, const ForestParams& params, int jobs) {
    if (train.samples.empty()) throw DataError("rf fit: empty training set");
    train.validate();
    if (params.ntree < 1) throw UsageError("rf fit: ntree must be positive");
    if (params.mtry < 1 || static_cast<std::size_t>(params.mtry) > train.feature_count)
        throw UsageError("rf fit: mtry " + std::to_string(params.mtry) +
                         " outside 1.." + std::to_string(train.feature_count));
    if (params.min_node_size < 1) throw UsageError("rf fit: min_node_size must be positive");

    const auto n = train.size();
    const auto ntree = static_cast<std::size_t>(params.ntree);

    ForestModel m;
    m.class_names = train.class_names;
    m.feature_count = train.feature_count;
    m.trees.resize(ntree);
    m.in_bag_counts.assign(ntree, std::vector<std::uint32_t>(n, 0));

    parallel_for(jobs, ntree, [&](std::size_t t) {
        Rng rng(derive_seed(params.seed, t));
        std::vector<std::uint32_t> bag(n);
        for (auto& b : bag) b = static_cast<std::uint32_t>(rng.below(n));
        for (auto b : bag) m.in_bag_counts[t][b]++;
        m.trees[t] = TreeBuilder(train, params, rng).build(std::move(bag));
    });

    m.oob_error = croppat::oob_error(m, train);
    return m;
}

std::vector<int> ForestModel::votes(std::span<const double> x) const {
    if (x.size() != feature_count)
        throw DataError("rf predict: input has " + std::to_string(x.size()) +
                        " features, model expects " + std::to_string(feature_count));
    std::vector<int> out(class_names.size(), 0);
    for (const auto& tree : trees) out[static_cast<std::size_t>(tree.route(x))]++;
    return out;
}

int ForestModel::predict(std::span<const double> x) const {
    auto v = votes(x);
    int best = 0;
    for (int c = 1; c < static_cast<int>(v.size()); ++c)
        if (v[static_cast<std::size_t>(c)] > v[static_cast<std::size_t>(best)]) best = c;
    return best;
}

double oob_error(const ForestModel& m, const Dataset& train) {
    std::size_t considered = 0;
    std::size_t wrong = 0;
    std::vector<int> votes(m.class_names.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        bool has_oob_tree = false;
        for (std::size_t t = 0; t < m.trees.size(); ++t) {
            if (m.in_bag_counts[t][i] != 0) continue;
            has_oob_tree = true;
            votes[static_cast<std::size_t>(m.trees[t].route(train.samples[i].features))]++;
        }
        if (!has_oob_tree) continue;
        considered++;
        int best = 0;
        for (int c = 1; c < static_cast<int>(votes.size()); ++c)
            if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
        if (best != train.samples[i].label) wrong++;
    }
    if (considered == 0) return 0.0;
    return static_cast<double>(wrong) / static_cast<double>(considered);
}

}  // namespace croppat
