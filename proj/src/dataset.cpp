#include "rftext/dataset.hpp"

#include "rftext/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

namespace rftext {

namespace {

// Splits one CSV record. Double-quoted fields may contain commas; "" escapes a quote.
std::vector<std::string> split_record(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.feature_names = feature_names;
    out.class_names = class_names;
    out.features.resize(static_cast<Eigen::Index>(indices.size()), cols());
    out.labels.reserve(indices.size());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(indices[r]));
        out.labels.push_back(labels[indices[r]]);
    }
    return out;
}

void Dataset::check() const {
    if (static_cast<std::size_t>(rows()) != labels.size())
        throw InputError(fmt::format("dataset has {} feature rows but {} labels", rows(), labels.size()));
    if (static_cast<std::size_t>(cols()) != feature_names.size())
        throw InputError(fmt::format("dataset has {} feature columns but {} names", cols(), feature_names.size()));
    std::set<std::string_view> seen;
    for (const auto& name : feature_names) {
        if (name.empty()) throw InputError("empty feature name");
        if (!seen.insert(name).second) throw InputError(fmt::format("duplicate feature name '{}'", name));
    }
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || labels[i] >= n_classes())
            throw InputError(fmt::format("label {} of row {} is not a valid class id", labels[i], i));
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot open dataset '{}'", path.string()));
    return parse_csv(in, path.string());
}

Dataset parse_csv(std::istream& in, std::string_view source) {
    std::string line;
    if (!std::getline(in, line)) throw InputError(fmt::format("{}: missing header row", source));
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    auto header = split_record(line);
    for (auto& h : header) h = std::string(trim(h));
    if (header.size() < 2 || header.back() != "label")
        throw InputError(fmt::format("{}:1: header must end with a 'label' column", source));
    header.pop_back();
    const std::size_t n_features = header.size();

    std::vector<double> values;
    std::vector<std::string> raw_labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_record(line);
        if (fields.size() != n_features + 1)
            throw InputError(fmt::format("{}:{}: expected {} columns, found {}", source, line_no, n_features + 1,
                                         fields.size()));
        for (std::size_t j = 0; j < n_features; ++j) {
            const auto cell = trim(fields[j]);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
                throw InputError(fmt::format("{}:{}: column {} ('{}'): '{}' is not a finite number", source,
                                             line_no, j + 1, header[j], cell));
            values.push_back(v);
        }
        raw_labels.emplace_back(trim(fields.back()));
    }
    if (raw_labels.empty()) throw InputError(fmt::format("{}: empty dataset (no data rows)", source));

    Dataset ds;
    ds.feature_names = std::move(header);
    const auto n = static_cast<Eigen::Index>(raw_labels.size());
    ds.features = Eigen::Map<const FeatureMatrix>(values.data(), n, static_cast<Eigen::Index>(n_features));

    std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
    ds.class_names.assign(distinct.begin(), distinct.end());
    std::map<std::string_view, int> ids;
    for (std::size_t c = 0; c < ds.class_names.size(); ++c) ids.emplace(ds.class_names[c], static_cast<int>(c));
    ds.labels.reserve(raw_labels.size());
    for (const auto& l : raw_labels) ds.labels.push_back(ids.at(l));

    ds.check();
    return ds;
}

std::string_view to_string(Partition p) {
    switch (p) {
        case Partition::Train: return "train";
        case Partition::Validation: return "validation";
        case Partition::Test: return "test";
    }
    return "?";
}

Partition partition_from_string(std::string_view s) {
    if (s == "train") return Partition::Train;
    if (s == "validation") return Partition::Validation;
    if (s == "test") return Partition::Test;
    throw InputError(fmt::format("unknown partition '{}'", s));
}

std::vector<std::size_t> SplitAssignment::indices(Partition p) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < partition.size(); ++i)
        if (partition[i] == p) out.push_back(i);
    return out;
}

std::vector<std::size_t> largest_remainder(std::size_t total, std::span<const double> weights) {
    std::vector<std::size_t> counts(weights.size());
    std::vector<double> remainders(weights.size());
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const double exact = weights[k] * static_cast<double>(total);
        counts[k] = static_cast<std::size_t>(std::floor(exact));
        remainders[k] = exact - std::floor(exact);
        assigned += counts[k];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
    for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++counts[order[r % order.size()]];
    return counts;
}

SplitAssignment grouped_stratified_split(const Dataset& dataset, std::span<const std::int64_t> group_ids,
                                         const SplitFractions& fractions, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(dataset.rows());
    if (group_ids.size() != n)
        throw InputError(fmt::format("{} group ids given for {} examples", group_ids.size(), n));
    const std::array<double, 3> weights{fractions.train, fractions.validation, fractions.test};
    for (double w : weights)
        if (!(w > 0.0 && w < 1.0)) throw InputError(fmt::format("split fraction {} is outside (0, 1)", w));
    if (std::abs(weights[0] + weights[1] + weights[2] - 1.0) > 1e-9)
        throw InputError(fmt::format("split fractions {}, {}, {} do not sum to 1", weights[0], weights[1], weights[2]));

    // A group's class is the label of its first member (by example index).
    std::map<std::int64_t, int> group_class;
    for (std::size_t i = 0; i < n; ++i) group_class.emplace(group_ids[i], dataset.labels[i]);

    std::vector<std::vector<std::int64_t>> groups_by_class(static_cast<std::size_t>(dataset.n_classes()));
    for (const auto& [gid, cls] : group_class) groups_by_class[static_cast<std::size_t>(cls)].push_back(gid);

    std::map<std::int64_t, Partition> group_partition;
    for (std::size_t cls = 0; cls < groups_by_class.size(); ++cls) {
        auto& groups = groups_by_class[cls];
        if (groups.empty()) continue;
        if (groups.size() < weights.size())
            throw InputError(fmt::format("class {} has {} groups; at least {} are needed to populate every partition",
                                         cls, groups.size(), weights.size()));
        Rng rng(derive_seed(seed, "split-class", cls));
        rng.shuffle(groups.begin(), groups.end());
        const auto counts = largest_remainder(groups.size(), weights);
        std::size_t pos = 0;
        for (std::size_t k = 0; k < counts.size(); ++k)
            for (std::size_t c = 0; c < counts[k]; ++c) group_partition[groups[pos++]] = static_cast<Partition>(k);
    }

    SplitAssignment out;
    out.seed = seed;
    out.partition.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.partition.push_back(group_partition.at(group_ids[i]));
    return out;
}

}  // namespace rftext
