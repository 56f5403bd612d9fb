#include "rftext/serialize.hpp"

#include "rftext/random.hpp"

#include <fmt/format.h>

#include <json.hpp>

namespace rftext {

TextEncoding TextEncoding::fit(const Dataset& train, const PreprocessConfig& config) {
    return {train.feature_names, fit_scaling(train), fit_percentiles(train), config};
}

std::string format_real(double v) { return fmt::format("{:.2f}", v); }

std::string render_value(const TextEncoding& enc, int feature, double v) {
    std::string out = enc.config.integer_normalisation
                          ? std::to_string(scale_value(enc.scaling, feature, v, enc.config))
                          : format_real(v);
    if (enc.config.verbal_description) {
        out += " (";
        out += to_string(describe_value(enc.bins, feature, v));
        out += ')';
    }
    return out;
}

std::string render_statement(const NodeDecision& node, FeatureRow x, const TextEncoding& enc) {
    return fmt::format("{} {} {} {}", enc.feature_names.at(static_cast<std::size_t>(node.feature)),
                       render_value(enc, node.feature, x(node.feature)), encode_relation(node.direction, enc.config),
                       render_value(enc, node.feature, node.threshold));
}

std::string render_output(const DecisionPath& path, FeatureRow x, const TextEncoding& enc) {
    std::string out;
    for (std::size_t k = 0; k < path.nodes.size(); ++k) {
        if (k > 0) out += " and ";
        out += render_statement(path.nodes[k], x, enc);
    }
    out += ". Label: ";
    out += std::to_string(path.label);
    return out;
}

std::string prompt_footer(const PreprocessConfig& config, int n_classes) {
    const PreprocessConfig& c = config;
    const std::string low = c.integer_normalisation ? "0" : "0.00";
    const std::string high = c.integer_normalisation ? "10" : "10.00";
    const std::string low_tag = c.verbal_description ? " (lower whisker)" : "";
    const std::string high_tag = c.verbal_description ? " (upper whisker)" : "";
    const std::string_view relations = c.relation_encoding ? "'is greater/less than'" : "'>' or '<='";

    std::string labels = "[";
    for (int k = 0; k < n_classes; ++k) labels += (k ? ", " : "") + std::to_string(k);
    labels += ']';

    return fmt::format(
        "Based on values of system features, classify the state of the system and explain the decision. "
        "Use logical rules comparing feature values with thresholds using {}. "
        "Format: '[feature_name] [value] [inequality] [threshold]', for example: "
        "'feature_name {}{} {} {}{}. Label: 0'. "
        "Provide a classification label from {}. Explanation and system label:",
        relations, low, low_tag, encode_relation(-1, c), high, high_tag, labels);
}

std::string render_prompt(FeatureRow x, const TextEncoding& enc, int n_classes) {
    std::string features;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (j > 0) features += ", ";
        features += enc.feature_names.at(static_cast<std::size_t>(j));
        features += ": ";
        features += render_value(enc, static_cast<int>(j), x(j));
    }
    return fmt::format("{} {}. {}", kPromptHeader, features, prompt_footer(enc.config, n_classes));
}

Corpus build_corpus(const Dataset& data, const SplitAssignment& split, const RandomForest& forest, int n_trees,
                    const TextEncoding& enc, std::uint64_t seed) {
    if (split.partition.size() != static_cast<std::size_t>(data.rows()))
        throw InputError("split assignment does not match the dataset size");
    Corpus corpus;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const auto x = data.features.row(i);
        const int y = data.labels[idx];
        ++corpus.stats.examples;
        const auto sampled = sample_correct_paths(forest, x, y, n_trees, derive_seed(seed, "emit", idx));
        if (sampled.empty()) {
            ++corpus.stats.examples_without_path;
            continue;
        }
        ++corpus.stats.examples_covered;
        const std::string prompt = render_prompt(x, enc, data.n_classes());
        const std::size_t first_of_group = corpus.pairs.size();
        for (const auto& s : sampled) {
            std::string output = render_output(s.path, x, enc);
            bool duplicate = false;
            for (std::size_t k = first_of_group; k < corpus.pairs.size(); ++k)
                duplicate = duplicate || corpus.pairs[k].output == output;
            if (duplicate) continue;
            corpus.pairs.push_back(TrainingPair{corpus.pairs.size(), idx, split.partition[idx], prompt,
                                                std::move(output), s.path.label, s.tree_index, s.path});
        }
    }
    corpus.stats.pairs = corpus.pairs.size();
    return corpus;
}

void write_corpus_jsonl(const Corpus& corpus, std::ostream& sink) {
    for (const auto& p : corpus.pairs) {
        const nlohmann::ordered_json rec{{"id", p.pair_id},         {"group_id", p.group_id},
                                         {"split", to_string(p.split)}, {"prompt", p.prompt},
                                         {"output", p.output},       {"label", p.label},
                                         {"tree_index", p.tree_index}};
        sink << rec.dump() << '\n';
    }
    if (!sink) throw std::runtime_error("failed to write corpus records");
}

void write_prompts_jsonl(const Dataset& data, const SplitAssignment& split, const TextEncoding& enc,
                         std::ostream& sink) {
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const nlohmann::ordered_json rec{{"id", idx},
                                         {"group_id", idx},
                                         {"split", to_string(split.partition[idx])},
                                         {"prompt", render_prompt(data.features.row(i), enc, data.n_classes())},
                                         {"label", data.labels[idx]}};
        sink << rec.dump() << '\n';
    }
    if (!sink) throw std::runtime_error("failed to write prompt records");
}

CorpusStats emit_corpus(const Dataset& data, const SplitAssignment& split, const RandomForest& forest, int n_trees,
                        const TextEncoding& enc, std::uint64_t seed, std::ostream& sink) {
    const auto corpus = build_corpus(data, split, forest, n_trees, enc, seed);
    write_corpus_jsonl(corpus, sink);
    return corpus.stats;
}

}  // namespace rftext
