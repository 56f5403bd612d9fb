#pragma once

#include "rftext/dataset.hpp"
#include "rftext/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace rftext {

/// One decision on a root-to-leaf path. direction -1 means x[feature] <= threshold
/// (left branch), +1 means x[feature] > threshold (right branch).
struct NodeDecision {
    int feature = 0;
    double threshold = 0.0;
    int direction = -1;

    bool operator==(const NodeDecision&) const = default;
};

struct DecisionPath {
    std::vector<NodeDecision> nodes;
    int label = 0;

    bool operator==(const DecisionPath&) const = default;
};

/// Internal nodes have feature >= 0 and two children; leaves have feature == -1.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> class_counts;  ///< bootstrap-weighted counts, leaves only
    int label = -1;                    ///< majority label, leaves only

    bool is_leaf() const { return feature < 0; }
};

class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes, int root = 0);

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    int root() const { return root_; }
    int depth() const;

    int predict(FeatureRow x) const;

    /// Throws InputError unless the tree is acyclic, every internal node has two
    /// in-range children and every leaf label is the lowest-id argmax of its counts.
    void check(int n_features, int n_classes) const;

private:
    std::vector<TreeNode> nodes_;
    int root_ = 0;
};

struct ForestParams {
    int n_estimators = 100;
    int max_depth = 2;
    int max_features = 0;  ///< 0 selects ceil(sqrt(F))
    bool bootstrap = true;
};

struct RandomForest {
    std::vector<DecisionTree> trees;
    ForestParams params;
    std::uint64_t seed = 0;
    int n_features = 0;
    int n_classes = 0;
};

int resolved_max_features(const ForestParams& params, int n_features);

/// Fits one CART tree with Gini impurity on weighted samples (weights are
/// bootstrap multiplicities; zero-weight rows are ignored).
DecisionTree fit_tree(const Dataset& train, std::span<const double> weights, const ForestParams& params,
                      std::uint64_t seed);

/// Tree i is fitted on its own bootstrap drawn from derive_seed(seed, "tree", i),
/// so the result does not depend on the order trees are built in.
RandomForest fit_forest(const Dataset& train, const ForestParams& params, std::uint64_t seed);

/// Majority vote over trees; ties go to the lowest class id.
int predict(const RandomForest& forest, FeatureRow x);

DecisionPath tree_decision_path(const DecisionTree& tree, FeatureRow x);

bool path_contains(const DecisionPath& path, FeatureRow x);

struct SampledPath {
    std::size_t tree_index = 0;
    DecisionPath path;
};

/// Draws n_trees times (with replacement) a tree whose path for x ends in label y,
/// then drops repeated paths. Empty when no tree classifies x as y.
std::vector<SampledPath> sample_correct_paths(const RandomForest& forest, FeatureRow x, int y, int n_trees,
                                              std::uint64_t seed);

struct CrossValidationSummary {
    double mean_accuracy = 0.0;  ///< percent
    double std_accuracy = 0.0;   ///< percent, population std over all folds
    std::vector<double> fold_accuracies;
};

/// Repeated stratified k-fold accuracy of the forest.
CrossValidationSummary cross_validate(const Dataset& dataset, int folds, int repeats, const ForestParams& params,
                                      std::uint64_t seed);

/// Versioned JSON document; see docs/schema.md.
nlohmann::ordered_json forest_to_json(const RandomForest& forest);
RandomForest forest_from_json(const nlohmann::ordered_json& doc);

}  // namespace rftext
