#pragma once

#include "rftext/dataset.hpp"
#include "rftext/ruleparse.hpp"
#include "rftext/serialize.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rftext {

/// Training features in the representation statements are written in: scaled
/// and clipped integers under integer normalisation, raw values otherwise.
FeatureMatrix statement_space(const FeatureMatrix& train_features, const PreprocessConfig& config,
                              const ScalingParams& scaling);

/// Rows of `space` that satisfy every predicate (LE: <=, GT: >, EQ: ==).
std::vector<std::size_t> designate_subset(const ParsedStatement& statement, const FeatureMatrix& space);

std::vector<std::size_t> designate_subset(const ParsedStatement& statement, const Dataset& train,
                                          const PreprocessConfig& config, const ScalingParams& scaling);

struct StatementMetrics {
    std::size_t subset_size = 0;
    std::size_t true_positives = 0;
    std::size_t class_support = 0;  ///< training examples whose label is the predicted one
    std::optional<double> precision;  ///< undefined for an empty subset
    std::optional<double> recall;     ///< undefined when the predicted class has no examples
};

StatementMetrics statement_metrics(std::span<const std::size_t> subset, int predicted_label,
                                   std::span<const int> train_labels);

struct LabelOutcome {
    std::optional<int> predicted;  ///< empty when no label clause was recovered
    int truth = 0;
};

/// Percent of outcomes whose recovered label equals the truth.
double label_accuracy(std::span<const LabelOutcome> outcomes);

struct ValidationRecord {
    std::int64_t id = 0;
    bool parse_ok = false;
    std::optional<ParseError> parse_error;
    bool lenient = false;
    std::optional<int> predicted_label;
    int true_label = 0;
    std::size_t subset_size = 0;
    std::optional<double> statement_precision;
    std::optional<double> statement_recall;
};

nlohmann::ordered_json to_json(const ValidationRecord& record);

/// Parses generated text and scores the training subset it designates.
class Validator {
public:
    Validator(const Dataset& train, TextEncoding encoding);

    ValidationRecord score(std::int64_t id, std::string_view text, int true_label) const;

    const FeatureMatrix& space() const { return space_; }
    const TextEncoding& encoding() const { return encoding_; }

private:
    std::vector<int> labels_;
    TextEncoding encoding_;
    FeatureMatrix space_;
};

struct ReportRow {
    std::string tag;
    double label_accuracy = 0.0;
    double statement_accuracy = 0.0;  ///< mean precision over defined records
    double statement_recall = 0.0;    ///< mean recall over defined records
    double correct = 0.0;             ///< percent parsed
    std::size_t records = 0;
    std::size_t empty_subsets = 0;
    std::size_t undefined_recall = 0;
};

/// Means are folded in id order. Undefined precision/recall values are left out
/// and counted; a mean over nothing is reported as 0.
ReportRow aggregate_report(std::span<const ValidationRecord> records, std::string tag);

inline constexpr std::string_view kReportHeader = "ds_name,label_accuracy,statement_accuracy,statement_recall,correct";

std::string to_csv_line(const ReportRow& row);

}  // namespace rftext
