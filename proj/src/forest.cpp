#include "rftext/forest.hpp"

#include "rftext/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rftext {

namespace {

int argmax_lowest(std::span<const double> counts) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(counts.size()); ++c)
        if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
    return best;
}

double gini(std::span<const double> counts, double total) {
    if (total <= 0.0) return 0.0;
    double sum_sq = 0.0;
    for (double c : counts) sum_sq += c * c;
    return 1.0 - sum_sq / (total * total);
}

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = -1.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Dataset& data, std::span<const double> weights, const ForestParams& params, std::uint64_t seed)
        : data_(data), weights_(weights), params_(params), rng_(seed),
          n_classes_(data.n_classes()), n_features_(static_cast<int>(data.cols())),
          max_features_(resolved_max_features(params, n_features_)) {}

    std::vector<TreeNode> build() {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < weights_.size(); ++i)
            if (weights_[i] > 0.0) rows.push_back(i);
        grow(rows, 0);
        return std::move(nodes_);
    }

private:
    std::vector<double> class_counts(std::span<const std::size_t> rows) const {
        std::vector<double> counts(static_cast<std::size_t>(n_classes_), 0.0);
        for (auto r : rows) counts[static_cast<std::size_t>(data_.labels[r])] += weights_[r];
        return counts;
    }

    int make_leaf(std::vector<double> counts) {
        TreeNode leaf;
        leaf.label = argmax_lowest(counts);
        leaf.class_counts = std::move(counts);
        nodes_.push_back(std::move(leaf));
        return static_cast<int>(nodes_.size()) - 1;
    }

    Split best_split_on(int feature, std::span<const std::size_t> rows, std::span<const double> parent_counts,
                        double total) const {
        std::vector<std::pair<double, std::size_t>> sorted;
        sorted.reserve(rows.size());
        for (auto r : rows) sorted.emplace_back(data_.features(static_cast<Eigen::Index>(r), feature), r);
        std::sort(sorted.begin(), sorted.end());

        const double parent_impurity = gini(parent_counts, total);
        std::vector<double> left(parent_counts.size(), 0.0);
        std::vector<double> right(parent_counts.begin(), parent_counts.end());
        double w_left = 0.0;
        Split best;
        for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
            const auto [value, row] = sorted[k];
            const double w = weights_[row];
            const auto cls = static_cast<std::size_t>(data_.labels[row]);
            left[cls] += w;
            right[cls] -= w;
            w_left += w;
            const double next = sorted[k + 1].first;
            if (!(next > value)) continue;
            const double w_right = total - w_left;
            const double child = (w_left * gini(left, w_left) + w_right * gini(right, w_right)) / total;
            const double gain = parent_impurity - child;
            // Strictly better only: the lowest threshold wins ties.
            if (gain > best.gain + 1e-12) {
                double mid = value + (next - value) / 2.0;
                if (!(mid < next)) mid = value;
                best = {feature, mid, gain};
            }
        }
        return best;
    }

    int grow(const std::vector<std::size_t>& rows, int depth) {
        auto counts = class_counts(rows);
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
        const auto nonzero = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; });
        if (depth >= params_.max_depth || nonzero <= 1 || rows.size() < 2) return make_leaf(std::move(counts));

        std::vector<int> candidates(static_cast<std::size_t>(n_features_));
        std::iota(candidates.begin(), candidates.end(), 0);
        rng_.shuffle(candidates.begin(), candidates.end());
        candidates.resize(static_cast<std::size_t>(max_features_));
        std::sort(candidates.begin(), candidates.end());

        Split best;
        for (int f : candidates) {
            const Split s = best_split_on(f, rows, counts, total);
            if (s.feature >= 0 && s.gain > best.gain + 1e-12) best = s;
        }
        if (best.feature < 0) return make_leaf(std::move(counts));

        std::vector<std::size_t> left_rows, right_rows;
        for (auto r : rows)
            (data_.features(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left_rows : right_rows)
                .push_back(r);

        const int id = static_cast<int>(nodes_.size());
        TreeNode node;
        node.feature = best.feature;
        node.threshold = best.threshold;
        nodes_.push_back(std::move(node));
        const int l = grow(left_rows, depth + 1);
        const int r = grow(right_rows, depth + 1);
        nodes_[static_cast<std::size_t>(id)].left = l;
        nodes_[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    const Dataset& data_;
    std::span<const double> weights_;
    const ForestParams& params_;
    Rng rng_;
    int n_classes_;
    int n_features_;
    int max_features_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, int root) : nodes_(std::move(nodes)), root_(root) {}

int DecisionTree::depth() const {
    auto rec = [&](auto&& self, int id) -> int {
        const auto& n = nodes_[static_cast<std::size_t>(id)];
        if (n.is_leaf()) return 0;
        return 1 + std::max(self(self, n.left), self(self, n.right));
    };
    return nodes_.empty() ? 0 : rec(rec, root_);
}

int DecisionTree::predict(FeatureRow x) const {
    int id = root_;
    while (!nodes_[static_cast<std::size_t>(id)].is_leaf()) {
        const auto& n = nodes_[static_cast<std::size_t>(id)];
        id = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(id)].label;
}

void DecisionTree::check(int n_features, int n_classes) const {
    const auto size = static_cast<int>(nodes_.size());
    if (size == 0 || root_ < 0 || root_ >= size) throw InputError("tree has no valid root");
    std::vector<int> visits(nodes_.size(), 0);
    std::vector<int> stack{root_};
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        if (++visits[static_cast<std::size_t>(id)] > 1) throw InputError(fmt::format("tree node {} is reachable twice", id));
        const auto& n = nodes_[static_cast<std::size_t>(id)];
        if (n.is_leaf()) {
            if (static_cast<int>(n.class_counts.size()) != n_classes)
                throw InputError(fmt::format("leaf {} has {} class counts, expected {}", id, n.class_counts.size(), n_classes));
            if (n.label != argmax_lowest(n.class_counts))
                throw InputError(fmt::format("leaf {} label is not the majority of its counts", id));
        } else {
            if (n.feature >= n_features) throw InputError(fmt::format("node {} splits on unknown feature {}", id, n.feature));
            for (int child : {n.left, n.right}) {
                if (child < 0 || child >= size) throw InputError(fmt::format("node {} has an invalid child", id));
                stack.push_back(child);
            }
        }
    }
}

int resolved_max_features(const ForestParams& params, int n_features) {
    if (params.max_features > 0) return std::min(params.max_features, n_features);
    return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_features)))));
}

DecisionTree fit_tree(const Dataset& train, std::span<const double> weights, const ForestParams& params,
                      std::uint64_t seed) {
    TreeBuilder builder(train, weights, params, seed);
    return DecisionTree(builder.build());
}

RandomForest fit_forest(const Dataset& train, const ForestParams& params, std::uint64_t seed) {
    if (train.rows() == 0) throw InputError("cannot fit a forest on an empty training set");
    if (params.max_depth < 1) throw InputError("max_depth must be at least 1");
    if (params.n_estimators < 1) throw InputError("n_estimators must be at least 1");
    std::vector<bool> present(static_cast<std::size_t>(train.n_classes()), false);
    for (int l : train.labels) present[static_cast<std::size_t>(l)] = true;
    if (std::count(present.begin(), present.end(), true) < 2)
        throw InputError("training set must contain at least two classes");

    RandomForest forest;
    forest.params = params;
    forest.seed = seed;
    forest.n_features = static_cast<int>(train.cols());
    forest.n_classes = train.n_classes();
    forest.trees.resize(static_cast<std::size_t>(params.n_estimators));

    const auto n = static_cast<std::size_t>(train.rows());
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        const auto tree_seed = derive_seed(seed, "tree", t);
        std::vector<double> weights(n, 1.0);
        if (params.bootstrap) {
            std::fill(weights.begin(), weights.end(), 0.0);
            Rng rng(derive_seed(tree_seed, "bootstrap", 0));
            for (std::size_t k = 0; k < n; ++k) weights[rng.below(n)] += 1.0;
        }
        forest.trees[t] = fit_tree(train, weights, params, derive_seed(tree_seed, "features", 0));
    }
    return forest;
}

int predict(const RandomForest& forest, FeatureRow x) {
    std::vector<double> votes(static_cast<std::size_t>(forest.n_classes), 0.0);
    for (const auto& tree : forest.trees) votes[static_cast<std::size_t>(tree.predict(x))] += 1.0;
    return argmax_lowest(votes);
}

DecisionPath tree_decision_path(const DecisionTree& tree, FeatureRow x) {
    DecisionPath path;
    const auto& nodes = tree.nodes();
    int id = tree.root();
    while (!nodes[static_cast<std::size_t>(id)].is_leaf()) {
        const auto& n = nodes[static_cast<std::size_t>(id)];
        const bool left = x(n.feature) <= n.threshold;
        path.nodes.push_back({n.feature, n.threshold, left ? -1 : +1});
        id = left ? n.left : n.right;
    }
    path.label = nodes[static_cast<std::size_t>(id)].label;
    return path;
}

bool path_contains(const DecisionPath& path, FeatureRow x) {
    return std::all_of(path.nodes.begin(), path.nodes.end(), [&](const NodeDecision& d) {
        return d.direction <= 0 ? x(d.feature) <= d.threshold : x(d.feature) > d.threshold;
    });
}

std::vector<SampledPath> sample_correct_paths(const RandomForest& forest, FeatureRow x, int y, int n_trees,
                                              std::uint64_t seed) {
    if (n_trees < 1) throw InputError("n_trees must be at least 1");
    std::vector<SampledPath> qualifying;
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
        auto path = tree_decision_path(forest.trees[t], x);
        if (path.label == y) qualifying.push_back({t, std::move(path)});
    }
    std::vector<SampledPath> out;
    if (qualifying.empty()) return out;
    Rng rng(seed);
    for (int rep = 0; rep < n_trees; ++rep) {
        const auto& pick = qualifying[rng.below(qualifying.size())];
        const bool seen = std::any_of(out.begin(), out.end(), [&](const SampledPath& s) { return s.path == pick.path; });
        if (!seen) out.push_back(pick);
    }
    return out;
}

CrossValidationSummary cross_validate(const Dataset& dataset, int folds, int repeats, const ForestParams& params,
                                      std::uint64_t seed) {
    if (folds < 2) throw InputError("cross-validation needs at least 2 folds");
    if (repeats < 1) throw InputError("cross-validation needs at least 1 repeat");
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(dataset.n_classes()));
    for (std::size_t i = 0; i < dataset.labels.size(); ++i)
        by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c)
        if (!by_class[c].empty() && by_class[c].size() < static_cast<std::size_t>(folds))
            throw InputError(fmt::format("class {} has {} examples, fewer than {} folds", c, by_class[c].size(), folds));

    CrossValidationSummary summary;
    for (int r = 0; r < repeats; ++r) {
        // Shuffle within each class and deal the examples round-robin onto folds.
        std::vector<int> fold_of(dataset.labels.size(), 0);
        Rng rng(derive_seed(seed, "cv-repeat", static_cast<std::uint64_t>(r)));
        int offset = 0;
        for (auto members : by_class) {
            rng.shuffle(members.begin(), members.end());
            for (std::size_t k = 0; k < members.size(); ++k)
                fold_of[members[k]] = static_cast<int>((k + static_cast<std::size_t>(offset)) % static_cast<std::size_t>(folds));
            offset = static_cast<int>((members.size() + static_cast<std::size_t>(offset)) % static_cast<std::size_t>(folds));
        }
        for (int f = 0; f < folds; ++f) {
            std::vector<std::size_t> train_idx, test_idx;
            for (std::size_t i = 0; i < fold_of.size(); ++i) (fold_of[i] == f ? test_idx : train_idx).push_back(i);
            const auto forest = fit_forest(dataset.subset(train_idx), params,
                                           derive_seed(seed, "cv-forest", static_cast<std::uint64_t>(r * folds + f)));
            std::size_t correct = 0;
            for (auto i : test_idx)
                if (predict(forest, dataset.features.row(static_cast<Eigen::Index>(i))) == dataset.labels[i]) ++correct;
            summary.fold_accuracies.push_back(100.0 * static_cast<double>(correct) / static_cast<double>(test_idx.size()));
        }
    }
    const Eigen::Map<const Eigen::ArrayXd> acc(summary.fold_accuracies.data(),
                                               static_cast<Eigen::Index>(summary.fold_accuracies.size()));
    summary.mean_accuracy = acc.mean();
    summary.std_accuracy = std::sqrt((acc - summary.mean_accuracy).square().mean());
    return summary;
}

}  // namespace rftext
