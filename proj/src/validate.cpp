#include "rftext/validate.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace rftext {

FeatureMatrix statement_space(const FeatureMatrix& train_features, const PreprocessConfig& config,
                              const ScalingParams& scaling) {
    if (!config.integer_normalisation) return train_features;
    return scale_matrix(scaling, train_features, config);
}

std::vector<std::size_t> designate_subset(const ParsedStatement& statement, const FeatureMatrix& space) {
    Eigen::Array<bool, Eigen::Dynamic, 1> keep = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(space.rows(), true);
    for (const auto& p : statement.predicates) {
        const auto column = space.col(p.feature_index).array();
        switch (p.comparator) {
            case Comparator::LE: keep = keep && (column <= p.threshold); break;
            case Comparator::GT: keep = keep && (column > p.threshold); break;
            case Comparator::EQ: keep = keep && (column == p.threshold); break;
        }
    }
    std::vector<std::size_t> out;
    for (Eigen::Index i = 0; i < keep.size(); ++i)
        if (keep(i)) out.push_back(static_cast<std::size_t>(i));
    return out;
}

std::vector<std::size_t> designate_subset(const ParsedStatement& statement, const Dataset& train,
                                          const PreprocessConfig& config, const ScalingParams& scaling) {
    return designate_subset(statement, statement_space(train.features, config, scaling));
}

StatementMetrics statement_metrics(std::span<const std::size_t> subset, int predicted_label,
                                   std::span<const int> train_labels) {
    StatementMetrics m;
    m.subset_size = subset.size();
    m.true_positives = static_cast<std::size_t>(
        std::count_if(subset.begin(), subset.end(), [&](std::size_t i) { return train_labels[i] == predicted_label; }));
    m.class_support = static_cast<std::size_t>(std::count(train_labels.begin(), train_labels.end(), predicted_label));
    if (m.subset_size > 0)
        m.precision = static_cast<double>(m.true_positives) / static_cast<double>(m.subset_size);
    if (m.class_support > 0)
        m.recall = static_cast<double>(m.true_positives) / static_cast<double>(m.class_support);
    return m;
}

double label_accuracy(std::span<const LabelOutcome> outcomes) {
    if (outcomes.empty()) throw InputError("label accuracy of an empty list");
    const auto hits = std::count_if(outcomes.begin(), outcomes.end(),
                                    [](const LabelOutcome& o) { return o.predicted && *o.predicted == o.truth; });
    return 100.0 * static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

nlohmann::ordered_json to_json(const ValidationRecord& r) {
    auto opt = [](const auto& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); };
    return {{"id", r.id},
            {"parse_ok", r.parse_ok},
            {"parse_error", r.parse_error ? nlohmann::ordered_json(to_string(*r.parse_error)) : nullptr},
            {"lenient", r.lenient},
            {"predicted_label", opt(r.predicted_label)},
            {"true_label", r.true_label},
            {"subset_size", r.subset_size},
            {"statement_precision", opt(r.statement_precision)},
            {"statement_recall", opt(r.statement_recall)}};
}

Validator::Validator(const Dataset& train, TextEncoding encoding)
    : labels_(train.labels), encoding_(std::move(encoding)),
      space_(statement_space(train.features, encoding_.config, encoding_.scaling)) {}

ValidationRecord Validator::score(std::int64_t id, std::string_view text, int true_label) const {
    ValidationRecord rec;
    rec.id = id;
    rec.true_label = true_label;
    const auto outcome = parse_output(text, encoding_.feature_names, encoding_.config);
    if (const auto* failure = std::get_if<ParseFailure>(&outcome)) {
        rec.parse_error = failure->reason;
        rec.predicted_label = failure->label;
        return rec;
    }
    const auto& statement = std::get<ParsedStatement>(outcome);
    rec.parse_ok = true;
    rec.lenient = statement.lenient;
    rec.predicted_label = statement.predicted_label;
    const auto subset = designate_subset(statement, space_);
    const auto m = statement_metrics(subset, statement.predicted_label, labels_);
    rec.subset_size = m.subset_size;
    rec.statement_precision = m.precision;
    rec.statement_recall = m.recall;
    return rec;
}

ReportRow aggregate_report(std::span<const ValidationRecord> records, std::string tag) {
    std::vector<const ValidationRecord*> ordered;
    for (const auto& r : records) ordered.push_back(&r);
    std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->id < b->id; });

    ReportRow row;
    row.tag = std::move(tag);
    row.records = ordered.size();
    if (ordered.empty()) return row;

    std::vector<LabelOutcome> labels;
    double precision_sum = 0.0, recall_sum = 0.0;
    std::size_t precision_n = 0, recall_n = 0, parsed = 0;
    for (const auto* r : ordered) {
        labels.push_back({r->predicted_label, r->true_label});
        if (!r->parse_ok) continue;
        ++parsed;
        if (r->statement_precision) {
            precision_sum += *r->statement_precision;
            ++precision_n;
        } else {
            ++row.empty_subsets;
        }
        if (r->statement_recall) {
            recall_sum += *r->statement_recall;
            ++recall_n;
        } else {
            ++row.undefined_recall;
        }
    }
    row.label_accuracy = label_accuracy(labels);
    row.statement_accuracy = precision_n ? 100.0 * precision_sum / static_cast<double>(precision_n) : 0.0;
    row.statement_recall = recall_n ? 100.0 * recall_sum / static_cast<double>(recall_n) : 0.0;
    row.correct = 100.0 * static_cast<double>(parsed) / static_cast<double>(ordered.size());
    return row;
}

std::string to_csv_line(const ReportRow& row) {
    return fmt::format("{},{:.2f},{:.2f},{:.2f},{:.2f}", row.tag, row.label_accuracy, row.statement_accuracy,
                       row.statement_recall, row.correct);
}

}  // namespace rftext
