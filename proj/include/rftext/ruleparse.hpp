#pragma once

#include "rftext/preprocess.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rftext {

/// LE covers "<", "<=" and "is less than"; GT covers ">", ">=" and "is greater than".
/// EQ comes from "=" / "is equal to", which trees never emit.
enum class Comparator { LE, GT, EQ };

std::string_view to_string(Comparator c);

struct Predicate {
    std::string feature_name;
    int feature_index = 0;
    Comparator comparator = Comparator::LE;
    double threshold = 0.0;

    bool operator==(const Predicate&) const = default;
};

struct ParsedStatement {
    std::vector<Predicate> predicates;
    int predicted_label = 0;
    std::string source_text;
    bool lenient = false;  ///< text before the first clause or after the label was skipped
};

enum class ParseError { MissingRelation, UnknownFeature, MalformedNumber, MissingLabel, EmptyStatement };

std::string_view to_string(ParseError e);

struct ParseFailure {
    ParseError reason = ParseError::EmptyStatement;
    std::size_t offset = 0;         ///< byte offset into the source text
    std::optional<int> label;       ///< recovered even when the clauses are broken
};

using ParseOutcome = std::variant<ParsedStatement, ParseFailure>;

/// Parses "<clause> and <clause> ... . Label: <id>" where a clause is
/// "<feature> <value>[ (<verbal>)] <relation> <threshold>[ (<verbal>)]".
/// Feature names are matched longest-prefix first. With integer normalisation
/// on, thresholds must be integers. Never throws.
ParseOutcome parse_output(std::string_view text, std::span<const std::string> feature_names,
                          const PreprocessConfig& config);

struct FilterStep {
    std::string feature_name;
    Comparator comparator = Comparator::LE;
    double threshold = 0.0;

    /// "keep rows where <feature> <op> <threshold>"
    std::string describe() const;
};

/// Sequential row filters equivalent to the statement's conjunction, in clause order.
std::vector<FilterStep> to_filter_program(const ParsedStatement& statement);

}  // namespace rftext
