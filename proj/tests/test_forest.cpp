#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include "rftext/forest.hpp"

#include <random>
#include <set>

using namespace rftext;
using rftext::test::iris;
using rftext::test::make_dataset;

namespace {

TreeNode leaf(int label, int n_classes = 3) {
    TreeNode n;
    n.class_counts.assign(static_cast<std::size_t>(n_classes), 0.0);
    n.class_counts[static_cast<std::size_t>(label)] = 1.0;
    n.label = label;
    return n;
}

TreeNode split(int feature, double threshold, int left, int right) {
    TreeNode n;
    n.feature = feature;
    n.threshold = threshold;
    n.left = left;
    n.right = right;
    return n;
}

// Depth 2: root on f0 at 5; left child on f1 at 2, right child on f1 at 3.
DecisionTree hand_tree() {
    return DecisionTree({split(0, 5.0, 1, 4), split(1, 2.0, 2, 3), leaf(0), leaf(1), split(1, 3.0, 5, 6), leaf(2),
                         leaf(1)});
}

RandomForest constant_forest(const std::vector<int>& votes, int n_classes) {
    RandomForest f;
    f.n_classes = n_classes;
    f.n_features = 1;
    for (int v : votes) f.trees.emplace_back(std::vector<TreeNode>{leaf(v, n_classes)});
    f.params.n_estimators = static_cast<int>(votes.size());
    return f;
}

// Every root-to-leaf path of a tree, by exhaustive enumeration of its structure.
std::vector<DecisionPath> all_leaf_paths(const DecisionTree& tree) {
    std::vector<DecisionPath> out;
    auto rec = [&](auto&& self, int id, DecisionPath prefix) -> void {
        const auto& n = tree.nodes()[static_cast<std::size_t>(id)];
        if (n.is_leaf()) {
            prefix.label = n.label;
            out.push_back(prefix);
            return;
        }
        auto l = prefix;
        l.nodes.push_back({n.feature, n.threshold, -1});
        self(self, n.left, l);
        prefix.nodes.push_back({n.feature, n.threshold, +1});
        self(self, n.right, prefix);
    };
    rec(rec, tree.root(), {});
    return out;
}

Dataset random_dataset(std::mt19937_64& gen, int n, int f, int classes) {
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
        std::vector<double> r;
        for (int j = 0; j < f; ++j) r.push_back(std::round(u(gen) * 10.0) / 10.0);
        rows.push_back(r);
        labels.push_back(r[0] + r[1 % f] > 10.0 ? i % classes : (i % 3 == 0 ? 1 % classes : 0));
    }
    labels[0] = 0;
    labels[1] = 1;
    return make_dataset(rows, labels, classes);
}

}  // namespace

TEST_CASE("default forest: 100 trees of depth at most 2") {
    const auto forest = fit_forest(iris(), {}, 11);
    CHECK(forest.trees.size() == 100);
    for (const auto& t : forest.trees) {
        CHECK(t.depth() <= 2);
        CHECK(t.depth() >= 1);
        CHECK_NOTHROW(t.check(4, 3));
    }
}

TEST_CASE("one separating feature: brute-force split oracle") {
    // Class 0 at 1..5, class 1 at 6..10, feature 1 constant.
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int v = 1; v <= 10; ++v) {
        rows.push_back({static_cast<double>(v), 3.0});
        labels.push_back(v <= 5 ? 0 : 1);
    }
    const auto ds = make_dataset(rows, labels, 2);

    // Oracle: evaluate every midpoint on feature 0 by weighted Gini decrease.
    double best_gain = -1.0, best_t = 0.0;
    for (int k = 1; k < 10; ++k) {
        const double t = k + 0.5;
        double l[2] = {0, 0}, r[2] = {0, 0};
        for (int i = 0; i < 10; ++i) (ds.features(i, 0) <= t ? l : r)[labels[static_cast<std::size_t>(i)]] += 1;
        auto g = [](const double* c) {
            const double n = c[0] + c[1];
            return n == 0 ? 0.0 : 1.0 - (c[0] * c[0] + c[1] * c[1]) / (n * n);
        };
        const double gain = 0.5 - ((l[0] + l[1]) * g(l) + (r[0] + r[1]) * g(r)) / 10.0;
        if (gain > best_gain) best_gain = gain, best_t = t;
    }
    REQUIRE(best_t == 5.5);

    ForestParams no_bootstrap;
    no_bootstrap.bootstrap = false;
    no_bootstrap.n_estimators = 5;
    for (const auto& t : fit_forest(ds, no_bootstrap, 1).trees) {
        CHECK(t.nodes()[static_cast<std::size_t>(t.root())].feature == 0);
        CHECK(t.nodes()[static_cast<std::size_t>(t.root())].threshold == best_t);
    }

    const auto forest = fit_forest(ds, {}, 5);
    for (const auto& t : forest.trees) {
        const auto& root = t.nodes()[static_cast<std::size_t>(t.root())];
        if (root.is_leaf()) continue;  // bootstrap drew a single class
        CHECK(root.feature == 0);
        CHECK(root.threshold > 1.0);
        CHECK(root.threshold < 10.0);
    }
    for (Eigen::Index i = 0; i < ds.rows(); ++i) CHECK(predict(forest, ds.features.row(i)) == labels[static_cast<std::size_t>(i)]);
}

TEST_CASE("fit is deterministic for a seed") {
    const auto ds = iris();
    CHECK(forest_to_json(fit_forest(ds, {}, 3)).dump() == forest_to_json(fit_forest(ds, {}, 3)).dump());
    CHECK(forest_to_json(fit_forest(ds, {}, 3)).dump() != forest_to_json(fit_forest(ds, {}, 4)).dump());
}

TEST_CASE("fit errors") {
    const auto one_class = make_dataset({{1.0}, {2.0}}, {0, 0}, 2);
    CHECK_THROWS_AS(fit_forest(one_class, {}, 0), InputError);
    ForestParams bad;
    bad.max_depth = 0;
    CHECK_THROWS_AS(fit_forest(iris(), bad, 0), InputError);

    // All-constant features: every tree is a single leaf, not an error.
    const auto flat = make_dataset({{1.0}, {1.0}, {1.0}}, {0, 1, 1}, 2);
    const auto f = fit_forest(flat, {}, 0);
    for (const auto& t : f.trees) CHECK(t.nodes().size() == 1);
}

TEST_CASE("predict: unanimity and lowest-id tie break") {
    const Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(1);
    CHECK(predict(constant_forest(std::vector<int>(7, 1), 3), x) == 1);
    std::vector<int> votes(50, 2);
    votes.insert(votes.end(), 50, 0);
    CHECK(predict(constant_forest(votes, 3), x) == 0);
}

TEST_CASE("setosa example agrees with an exhaustively grown single tree") {
    const auto ds = iris();
    ForestParams deep;
    deep.n_estimators = 1;
    deep.max_depth = 64;
    deep.max_features = 4;
    deep.bootstrap = false;
    const auto oracle = fit_forest(ds, deep, 0);
    Eigen::RowVectorXd x(4);
    x << 5.0, 3.4, 1.5, 0.2;
    CHECK(oracle.trees[0].predict(x) == 0);
    CHECK(predict(fit_forest(ds, {}, 9), x) == 0);
}

TEST_CASE("tree_decision_path") {
    SUBCASE("depth-1 tree on petal length at 2.45") {
        const DecisionTree t({split(2, 2.45, 1, 2), leaf(0), leaf(1)});
        Eigen::RowVectorXd x(4);
        x << 6.7, 3.0, 6.70, 2.0;
        const auto p = tree_decision_path(t, x);
        REQUIRE(p.nodes.size() == 1);
        CHECK(p.nodes[0] == NodeDecision{2, 2.45, +1});
        CHECK(p.label == 1);
        x(2) = 2.45;
        CHECK(tree_decision_path(t, x).nodes[0].direction == -1);
    }
    SUBCASE("depth-2 tree: all four leaves") {
        const auto t = hand_tree();
        const std::vector<std::pair<Eigen::RowVector2d, DecisionPath>> cases{
            {{4.0, 1.0}, {{{0, 5.0, -1}, {1, 2.0, -1}}, 0}},
            {{4.0, 2.5}, {{{0, 5.0, -1}, {1, 2.0, +1}}, 1}},
            {{6.0, 3.0}, {{{0, 5.0, +1}, {1, 3.0, -1}}, 2}},
            {{6.0, 3.5}, {{{0, 5.0, +1}, {1, 3.0, +1}}, 1}},
        };
        for (const auto& [x, expected] : cases) {
            const auto p = tree_decision_path(t, x);
            CHECK(p == expected);
            CHECK(p.label == t.predict(x));
            CHECK(path_contains(p, x));
        }
    }
}

TEST_CASE("path_contains") {
    Eigen::RowVectorXd x(4);
    x << 6.7, 3.0, 6.70, 2.0;
    CHECK(path_contains({{{2, 2.45, +1}}, 1}, x));
    CHECK_FALSE(path_contains({{{2, 2.45, -1}}, 1}, x));
    x(2) = 2.45;
    CHECK(path_contains({{{2, 2.45, -1}}, 1}, x));
    const DecisionPath contradictory{{{0, 5.0, +1}, {0, 3.0, -1}}, 0};
    for (double v = -10.0; v <= 10.0; v += 0.25) {
        x(0) = v;
        CHECK_FALSE(path_contains(contradictory, x));
    }
}

TEST_CASE("property: path consistency, leaf partition and vote identity") {
    std::mt19937_64 gen(77);
    for (int trial = 0; trial < 20; ++trial) {
        const int f = 2 + static_cast<int>(gen() % 3);
        const auto ds = random_dataset(gen, 60, f, 3);
        ForestParams p;
        p.n_estimators = 15;
        p.max_depth = 1 + static_cast<int>(gen() % 3);
        const auto forest = fit_forest(ds, p, gen());

        std::uniform_real_distribution<double> u(-1.0, 11.0);
        for (int k = 0; k < 100; ++k) {
            Eigen::RowVectorXd x(f);
            for (int j = 0; j < f; ++j) x(j) = std::round(u(gen) * 10.0) / 10.0;
            std::vector<double> votes(3, 0.0);
            for (const auto& tree : forest.trees) {
                const auto path = tree_decision_path(tree, x);
                CHECK(path_contains(path, x));
                CHECK(static_cast<int>(path.nodes.size()) <= p.max_depth);
                votes[static_cast<std::size_t>(path.label)] += 1;
                const auto leaves = all_leaf_paths(tree);
                CHECK(std::count_if(leaves.begin(), leaves.end(),
                                    [&](const DecisionPath& l) { return path_contains(l, x); }) == 1);
            }
            const int mode = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
            CHECK(predict(forest, x) == mode);
        }
    }
}

TEST_CASE("sample_correct_paths") {
    SUBCASE("80 of 100 trees correct: two draws, all from correct trees") {
        std::vector<DecisionTree> trees;
        for (int t = 0; t < 100; ++t) {
            const int lab = t < 80 ? 1 : 0;
            trees.emplace_back(std::vector<TreeNode>{split(0, 0.01 * t, 1, 2), leaf(1 - lab), leaf(lab)});
        }
        RandomForest f;
        f.trees = trees;
        f.n_classes = 3;
        f.n_features = 1;
        const Eigen::RowVectorXd x = Eigen::RowVectorXd::Constant(1, 5.0);
        int two = 0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto s = sample_correct_paths(f, x, 1, 2, seed);
            CHECK((s.size() == 1 || s.size() == 2));
            two += s.size() == 2;
            for (const auto& p : s) {
                CHECK(p.tree_index < 80);
                CHECK(p.path.label == 1);
            }
        }
        CHECK(two >= 45);
    }
    SUBCASE("no tree produces y") {
        const Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(1);
        CHECK(sample_correct_paths(constant_forest({0, 0, 1}, 3), x, 2, 2, 0).empty());
    }
    SUBCASE("exactly one qualifying tree") {
        const Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(1);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto s = sample_correct_paths(constant_forest({0, 2, 0}, 3), x, 2, 1, seed);
            REQUIRE(s.size() == 1);
            CHECK(s[0].tree_index == 1);
        }
    }
    SUBCASE("property: only paths with label y, deterministic") {
        const auto ds = iris();
        const auto forest = fit_forest(ds, {}, 2);
        for (Eigen::Index i = 0; i < ds.rows(); ++i) {
            const int y = ds.labels[static_cast<std::size_t>(i)];
            const auto s = sample_correct_paths(forest, ds.features.row(i), y, 3, static_cast<std::uint64_t>(i));
            for (const auto& p : s) {
                CHECK(p.path.label == y);
                CHECK(path_contains(p.path, ds.features.row(i)));
            }
            const auto again = sample_correct_paths(forest, ds.features.row(i), y, 3, static_cast<std::uint64_t>(i));
            REQUIRE(again.size() == s.size());
            for (std::size_t k = 0; k < s.size(); ++k) CHECK(again[k].path == s[k].path);
        }
    }
}

TEST_CASE("forest JSON round trip") {
    const auto ds = iris();
    const auto forest = fit_forest(ds, {}, 21);
    const auto doc = forest_to_json(forest);
    const auto back = forest_from_json(doc);
    CHECK(forest_to_json(back).dump() == doc.dump());
    for (Eigen::Index i = 0; i < ds.rows(); ++i) CHECK(predict(back, ds.features.row(i)) == predict(forest, ds.features.row(i)));

    auto broken = doc;
    broken["version"] = 99;
    CHECK_THROWS_AS(forest_from_json(broken), InputError);
    broken = doc;
    broken["trees"][0]["left"]["label"] = 2;  // no longer the majority of its counts
    broken["trees"][0]["left"]["class_counts"] = {5.0, 0.0, 0.0};
    CHECK_THROWS_AS(forest_from_json(broken), InputError);
    broken = doc;
    broken["trees"].erase(0);
    CHECK_THROWS_AS(forest_from_json(broken), InputError);
}

TEST_CASE("cross_validate") {
    const auto small = make_dataset({{1}, {2}, {3}, {4}, {5}, {6}}, {0, 0, 0, 1, 1, 1}, 2);
    CHECK_THROWS_WITH_AS(cross_validate(small, 5, 1, {}, 0), doctest::Contains("class 0"), InputError);
    CHECK_THROWS_AS(cross_validate(small, 1, 1, {}, 0), InputError);
    ForestParams p;
    p.n_estimators = 10;
    const auto s = cross_validate(iris(), 5, 2, p, 0);
    CHECK(s.fold_accuracies.size() == 10);
    CHECK(s.mean_accuracy > 85.0);
    CHECK(s.std_accuracy >= 0.0);
    CHECK(cross_validate(iris(), 5, 2, p, 0).fold_accuracies == s.fold_accuracies);
}
