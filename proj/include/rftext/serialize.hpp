#pragma once

#include "rftext/dataset.hpp"
#include "rftext/forest.hpp"
#include "rftext/preprocess.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace rftext {

/// Everything needed to turn numbers into text for one run.
struct TextEncoding {
    std::vector<std::string> feature_names;
    ScalingParams scaling;
    PercentileBins bins;
    PreprocessConfig config;

    /// Fits scaling and percentile bins on the training partition.
    static TextEncoding fit(const Dataset& train, const PreprocessConfig& config);
};

inline constexpr std::string_view kPromptHeader = "Here is the description of system state:";

/// Two-decimal fixed rendering used for every raw real.
std::string format_real(double v);

/// "<value>[ (<verbal class>)]" for feature j, in the active representation.
std::string render_value(const TextEncoding& enc, int feature, double v);

/// "<feature name> <value> <relation> <threshold>", each number optionally decorated.
std::string render_statement(const NodeDecision& node, FeatureRow x, const TextEncoding& enc);

/// Statements joined by " and ", then ". Label: <class id>".
std::string render_output(const DecisionPath& path, FeatureRow x, const TextEncoding& enc);

std::string prompt_footer(const PreprocessConfig& config, int n_classes);

std::string render_prompt(FeatureRow x, const TextEncoding& enc, int n_classes);

struct TrainingPair {
    std::size_t pair_id = 0;
    std::size_t group_id = 0;  ///< source example index
    Partition split = Partition::Train;
    std::string prompt;
    std::string output;
    int label = 0;
    std::size_t tree_index = 0;
    DecisionPath path;
};

struct CorpusStats {
    std::size_t examples = 0;
    std::size_t examples_covered = 0;
    std::size_t examples_without_path = 0;
    std::size_t pairs = 0;
};

struct Corpus {
    std::vector<TrainingPair> pairs;
    CorpusStats stats;
};

/// Samples up to n_trees correct paths per example (seeded per example from
/// derive_seed(seed, "emit", index)) and renders the pairs, ordered by
/// (group id, draw). Pairs with an identical (group id, output) are kept once.
Corpus build_corpus(const Dataset& data, const SplitAssignment& split, const RandomForest& forest, int n_trees,
                    const TextEncoding& enc, std::uint64_t seed);

/// One JSON object per line: id, group_id, split, prompt, output, label, tree_index.
void write_corpus_jsonl(const Corpus& corpus, std::ostream& sink);

/// One prompt record per example: id, group_id, split, prompt, label.
void write_prompts_jsonl(const Dataset& data, const SplitAssignment& split, const TextEncoding& enc,
                         std::ostream& sink);

/// build_corpus followed by write_corpus_jsonl. Throws if the sink fails.
CorpusStats emit_corpus(const Dataset& data, const SplitAssignment& split, const RandomForest& forest, int n_trees,
                        const TextEncoding& enc, std::uint64_t seed, std::ostream& sink);

}  // namespace rftext
