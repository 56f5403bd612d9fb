#include "rftext/forest.hpp"

#include <fmt/format.h>

namespace rftext {

namespace {

constexpr std::string_view kForestFormat = "rftext-forest";
constexpr int kForestVersion = 1;

using json = nlohmann::ordered_json;

json node_to_json(const std::vector<TreeNode>& nodes, int id) {
    const auto& n = nodes[static_cast<std::size_t>(id)];
    if (n.is_leaf()) return json{{"class_counts", n.class_counts}, {"label", n.label}};
    return json{{"feature", n.feature},
                {"threshold", n.threshold},
                {"left", node_to_json(nodes, n.left)},
                {"right", node_to_json(nodes, n.right)}};
}

int node_from_json(const json& doc, std::vector<TreeNode>& nodes) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (doc.contains("feature")) {
        TreeNode n;
        n.feature = doc.at("feature").get<int>();
        n.threshold = doc.at("threshold").get<double>();
        n.left = node_from_json(doc.at("left"), nodes);
        n.right = node_from_json(doc.at("right"), nodes);
        nodes[static_cast<std::size_t>(id)] = std::move(n);
    } else {
        auto& leaf = nodes[static_cast<std::size_t>(id)];
        leaf.class_counts = doc.at("class_counts").get<std::vector<double>>();
        leaf.label = doc.at("label").get<int>();
    }
    return id;
}

}  // namespace

nlohmann::ordered_json forest_to_json(const RandomForest& forest) {
    json trees = json::array();
    for (const auto& tree : forest.trees) trees.push_back(node_to_json(tree.nodes(), tree.root()));
    return json{{"format", kForestFormat},
                {"version", kForestVersion},
                {"n_features", forest.n_features},
                {"n_classes", forest.n_classes},
                {"seed", forest.seed},
                {"params",
                 {{"n_estimators", forest.params.n_estimators},
                  {"max_depth", forest.params.max_depth},
                  {"max_features", forest.params.max_features},
                  {"bootstrap", forest.params.bootstrap}}},
                {"trees", std::move(trees)}};
}

RandomForest forest_from_json(const nlohmann::ordered_json& doc) {
    try {
        if (doc.at("format").get<std::string>() != kForestFormat)
            throw InputError("document is not a serialized forest");
        if (const int v = doc.at("version").get<int>(); v != kForestVersion)
            throw InputError(fmt::format("unsupported forest version {}", v));
        RandomForest forest;
        forest.n_features = doc.at("n_features").get<int>();
        forest.n_classes = doc.at("n_classes").get<int>();
        forest.seed = doc.at("seed").get<std::uint64_t>();
        const auto& p = doc.at("params");
        forest.params.n_estimators = p.at("n_estimators").get<int>();
        forest.params.max_depth = p.at("max_depth").get<int>();
        forest.params.max_features = p.at("max_features").get<int>();
        forest.params.bootstrap = p.at("bootstrap").get<bool>();
        for (const auto& t : doc.at("trees")) {
            std::vector<TreeNode> nodes;
            node_from_json(t, nodes);
            DecisionTree tree(std::move(nodes));
            tree.check(forest.n_features, forest.n_classes);
            forest.trees.push_back(std::move(tree));
        }
        if (static_cast<int>(forest.trees.size()) != forest.params.n_estimators)
            throw InputError("forest tree count does not match n_estimators");
        return forest;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(fmt::format("malformed forest document: {}", e.what()));
    }
}

}  // namespace rftext
