#include "rftext/ruleparse.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

namespace rftext {

std::string_view to_string(Comparator c) {
    switch (c) {
        case Comparator::LE: return "<=";
        case Comparator::GT: return ">";
        case Comparator::EQ: return "==";
    }
    return "?";
}

std::string_view to_string(ParseError e) {
    switch (e) {
        case ParseError::MissingRelation: return "MissingRelation";
        case ParseError::UnknownFeature: return "UnknownFeature";
        case ParseError::MalformedNumber: return "MalformedNumber";
        case ParseError::MissingLabel: return "MissingLabel";
        case ParseError::EmptyStatement: return "EmptyStatement";
    }
    return "?";
}

namespace {

struct RelationToken {
    std::string_view text;
    Comparator comparator;
};

// Longest tokens first so "<=" is not read as "<".
constexpr std::array<RelationToken, 8> kRelations{{
    {"is greater than", Comparator::GT},
    {"is less than", Comparator::LE},
    {"is equal to", Comparator::EQ},
    {"<=", Comparator::LE},
    {">=", Comparator::GT},
    {"<", Comparator::LE},
    {">", Comparator::GT},
    {"=", Comparator::EQ},
}};

constexpr std::array<std::string_view, 7> kVerbalClasses{
    "lower outlier", "lower whisker", "median", "upper whisker", "upper outlier", "lower quantile", "upper quantile",
};

constexpr std::string_view kLabelKey = "Label:";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

class ClauseScanner {
public:
    ClauseScanner(std::string_view text, std::size_t end, std::span<const std::string> names,
                  const PreprocessConfig& config)
        : text_(text), end_(end), names_(names), config_(config) {}

    std::optional<ParseFailure> run(ParsedStatement& out) {
        skip_spaces();
        if (pos_ >= end_) return fail(ParseError::EmptyStatement);
        if (!match_feature_here() && !skip_leading_text()) return fail(ParseError::UnknownFeature);
        out.lenient = lenient_;
        while (true) {
            if (auto err = clause(out)) return err;
            skip_spaces();
            if (pos_ >= end_) return std::nullopt;
            if (!consume("and") || (pos_ < end_ && !is_space(text_[pos_]))) return fail(ParseError::MissingRelation);
            skip_spaces();
            if (pos_ >= end_) return fail(ParseError::EmptyStatement);
        }
    }

private:
    ParseFailure fail(ParseError e) const { return {e, pos_, std::nullopt}; }

    void skip_spaces() {
        while (pos_ < end_ && is_space(text_[pos_])) ++pos_;
    }

    bool consume(std::string_view token) {
        if (text_.substr(pos_, std::min(token.size(), end_ - pos_)) != token) return false;
        pos_ += token.size();
        return true;
    }

    // Longest known feature name starting at `at` and followed by whitespace.
    std::optional<std::size_t> feature_at(std::size_t at) const {
        std::optional<std::size_t> best;
        for (std::size_t k = 0; k < names_.size(); ++k) {
            const auto& name = names_[k];
            if (name.empty() || at + name.size() >= end_) continue;
            if (text_.compare(at, name.size(), name) != 0 || !is_space(text_[at + name.size()])) continue;
            if (!best || name.size() > names_[*best].size()) best = k;
        }
        return best;
    }

    bool match_feature_here() const { return feature_at(pos_).has_value(); }

    // Preamble such as "Explanation: ..." is tolerated when the first clause
    // follows a sentence boundary (':', '.' or a newline).
    bool skip_leading_text() {
        for (std::size_t p = pos_; p < end_; ++p) {
            const char c = text_[p];
            if (c != ':' && c != '.' && c != '\n') continue;
            std::size_t q = p + 1;
            while (q < end_ && is_space(text_[q])) ++q;
            if (q < end_ && (q > p + 1 || c == '\n') && feature_at(q)) {
                pos_ = q;
                lenient_ = true;
                return true;
            }
        }
        return false;
    }

    std::optional<double> number() {
        const std::size_t start = pos_;
        std::size_t p = pos_;
        if (p < end_ && (text_[p] == '-' || text_[p] == '+')) ++p;
        const std::size_t int_start = p;
        while (p < end_ && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
        std::size_t digits = p - int_start;
        if (p + 1 < end_ && text_[p] == '.' && std::isdigit(static_cast<unsigned char>(text_[p + 1]))) {
            ++p;
            while (p < end_ && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p, ++digits;
        }
        if (digits == 0) return std::nullopt;
        if (p < end_) {
            const bool glued = std::isalnum(static_cast<unsigned char>(text_[p])) ||
                               (text_[p] == '.' && p + 1 < end_ && !is_space(text_[p + 1]));
            if (glued) return std::nullopt;
        }
        const char* first = text_.data() + start + (text_[start] == '+' ? 1 : 0);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(first, text_.data() + p, v);
        if (ec != std::errc{} || ptr != text_.data() + p) return std::nullopt;
        pos_ = p;
        return v;
    }

    void optional_verbal_class() {
        const std::size_t save = pos_;
        skip_spaces();
        if (!consume("(")) {
            pos_ = save;
            return;
        }
        for (auto v : kVerbalClasses) {
            const std::size_t inner = pos_;
            if (consume(v) && consume(")")) return;
            pos_ = inner;
        }
        pos_ = save;
    }

    std::optional<Comparator> relation() {
        for (const auto& r : kRelations) {
            if (consume(r.text)) return r.comparator;
        }
        return std::nullopt;
    }

    std::optional<ParseFailure> clause(ParsedStatement& out) {
        const auto feature = feature_at(pos_);
        if (!feature) return fail(ParseError::UnknownFeature);
        pos_ += names_[*feature].size();
        skip_spaces();
        if (!number()) return fail(ParseError::MalformedNumber);
        optional_verbal_class();
        skip_spaces();
        const auto cmp = relation();
        if (!cmp) return fail(ParseError::MissingRelation);
        skip_spaces();
        const std::size_t threshold_at = pos_;
        const auto threshold = number();
        if (!threshold) return fail(ParseError::MalformedNumber);
        if (config_.integer_normalisation && std::floor(*threshold) != *threshold)
            return ParseFailure{ParseError::MalformedNumber, threshold_at, std::nullopt};
        optional_verbal_class();
        out.predicates.push_back({names_[*feature], static_cast<int>(*feature), *cmp, *threshold});
        return std::nullopt;
    }

    std::string_view text_;
    std::size_t end_;
    std::span<const std::string> names_;
    const PreprocessConfig& config_;
    std::size_t pos_ = 0;
    bool lenient_ = false;
};

struct LabelClause {
    std::size_t key_at = 0;
    int label = 0;
    bool trailing_text = false;
};

std::optional<LabelClause> find_label(std::string_view text) {
    const auto at = text.rfind(kLabelKey);
    if (at == std::string_view::npos) return std::nullopt;
    std::size_t p = at + kLabelKey.size();
    while (p < text.size() && is_space(text[p])) ++p;
    const std::size_t digits_at = p;
    while (p < text.size() && std::isdigit(static_cast<unsigned char>(text[p]))) ++p;
    if (p == digits_at || p - digits_at > 9) return std::nullopt;
    LabelClause out;
    out.key_at = at;
    std::from_chars(text.data() + digits_at, text.data() + p, out.label);
    std::size_t q = p;
    while (q < text.size() && (is_space(text[q]) || text[q] == '.')) ++q;
    out.trailing_text = q < text.size();
    return out;
}

}  // namespace

ParseOutcome parse_output(std::string_view text, std::span<const std::string> feature_names,
                          const PreprocessConfig& config) {
    const auto label = find_label(text);
    if (!label) return ParseFailure{ParseError::MissingLabel, text.size(), std::nullopt};

    // The statement body ends before the label key, minus the sentence period.
    std::size_t end = label->key_at;
    while (end > 0 && is_space(text[end - 1])) --end;
    if (end > 0 && text[end - 1] == '.') --end;

    ParsedStatement statement;
    ClauseScanner scanner(text, end, feature_names, config);
    if (auto err = scanner.run(statement)) {
        err->label = label->label;
        return *err;
    }
    const bool only_equalities = std::all_of(statement.predicates.begin(), statement.predicates.end(),
                                             [](const Predicate& p) { return p.comparator == Comparator::EQ; });
    if (only_equalities) return ParseFailure{ParseError::MissingRelation, 0, label->label};

    statement.predicted_label = label->label;
    statement.source_text = std::string(text);
    statement.lenient = statement.lenient || label->trailing_text;
    return statement;
}

std::string FilterStep::describe() const {
    return fmt::format("keep rows where {} {} {}", feature_name, to_string(comparator), threshold);
}

std::vector<FilterStep> to_filter_program(const ParsedStatement& statement) {
    std::vector<FilterStep> steps;
    steps.reserve(statement.predicates.size());
    for (const auto& p : statement.predicates) steps.push_back({p.feature_name, p.comparator, p.threshold});
    return steps;
}

}  // namespace rftext
