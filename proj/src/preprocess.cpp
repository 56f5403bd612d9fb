#include "rftext/preprocess.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace rftext {

std::string PreprocessConfig::tag() const {
    std::string out;
    auto add = [&](bool on, std::string_view name) {
        if (!on) return;
        if (!out.empty()) out += '+';
        out += name;
    };
    add(integer_normalisation, "IN");
    add(verbal_description, "VD");
    add(relation_encoding, "RE");
    return out.empty() ? "none" : out;
}

PreprocessConfig PreprocessConfig::from_tag(std::string_view tag) {
    PreprocessConfig c;
    if (tag == "none" || tag.empty()) return c;
    std::size_t pos = 0;
    while (pos <= tag.size()) {
        const auto end = std::min(tag.find('+', pos), tag.size());
        const auto part = tag.substr(pos, end - pos);
        if (part == "IN") c.integer_normalisation = true;
        else if (part == "VD" || part == "VN") c.verbal_description = true;
        else if (part == "RE") c.relation_encoding = true;
        else throw InputError(fmt::format("unknown preprocessing option '{}' in '{}'", part, tag));
        pos = end + 1;
    }
    return c;
}

std::array<PreprocessConfig, 8> PreprocessConfig::all() {
    std::array<PreprocessConfig, 8> out;
    for (unsigned bits = 0; bits < 8; ++bits) {
        out[bits].integer_normalisation = bits & 1u;
        out[bits].verbal_description = bits & 2u;
        out[bits].relation_encoding = bits & 4u;
    }
    return out;
}

ScalingParams fit_scaling(const Dataset& train) {
    if (train.rows() == 0) throw InputError("cannot fit scaling on an empty training set");
    return {train.features.colwise().minCoeff(), train.features.colwise().maxCoeff()};
}

int scale_value(const ScalingParams& params, int feature, double v, const PreprocessConfig& config) {
    const double lo = params.v_min(feature);
    const double hi = params.v_max(feature);
    if (!(hi > lo)) return config.range_min;
    const double span = static_cast<double>(config.range_max - config.range_min);
    const double scaled = std::round((v - lo) / (hi - lo) * span + config.range_min);
    return static_cast<int>(std::clamp(scaled, static_cast<double>(config.range_min),
                                       static_cast<double>(config.range_max)));
}

FeatureMatrix scale_matrix(const ScalingParams& params, const FeatureMatrix& x, const PreprocessConfig& config) {
    FeatureMatrix out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            out(i, j) = scale_value(params, static_cast<int>(j), x(i, j), config);
    return out;
}

double linear_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw InputError("quantile of an empty sample");
    const double h = static_cast<double>(sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

PercentileBins fit_percentiles(const Dataset& train) {
    if (train.rows() == 0) throw InputError("cannot fit percentiles on an empty training set");
    PercentileBins bins;
    bins.cuts.resize(train.cols(), 5);
    std::vector<double> column(static_cast<std::size_t>(train.rows()));
    for (Eigen::Index j = 0; j < train.cols(); ++j) {
        Eigen::Map<Eigen::VectorXd>(column.data(), train.rows()) = train.features.col(j);
        std::sort(column.begin(), column.end());
        for (std::size_t k = 0; k < PercentileBins::levels.size(); ++k)
            bins.cuts(j, static_cast<Eigen::Index>(k)) = linear_quantile(column, PercentileBins::levels[k]);
    }
    return bins;
}

std::string_view to_string(VerbalClass c) {
    switch (c) {
        case VerbalClass::LowerOutlier: return "lower outlier";
        case VerbalClass::LowerWhisker: return "lower whisker";
        case VerbalClass::Median: return "median";
        case VerbalClass::UpperWhisker: return "upper whisker";
        case VerbalClass::UpperOutlier: return "upper outlier";
    }
    return "?";
}

VerbalClass describe_value(const PercentileBins& bins, int feature, double v) {
    const auto cut = bins.cuts.row(feature);
    if (v < cut(0)) return VerbalClass::LowerOutlier;
    if (v < cut(1)) return VerbalClass::LowerWhisker;
    if (v <= cut(3)) return VerbalClass::Median;
    if (v <= cut(4)) return VerbalClass::UpperWhisker;
    return VerbalClass::UpperOutlier;
}

std::string_view encode_relation(int direction, const PreprocessConfig& config) {
    if (direction != -1 && direction != 1) throw InputError(fmt::format("invalid branch direction {}", direction));
    if (config.relation_encoding) return direction < 0 ? "is less than" : "is greater than";
    return direction < 0 ? "<=" : ">";
}

namespace {

std::vector<double> to_vector(const Eigen::RowVectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::RowVectorXd row_from(const nlohmann::ordered_json& a) {
    const auto values = a.get<std::vector<double>>();
    return Eigen::Map<const Eigen::RowVectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

nlohmann::ordered_json to_json(const PreprocessConfig& config) {
    return {{"integer_normalisation", config.integer_normalisation},
            {"verbal_description", config.verbal_description},
            {"relation_encoding", config.relation_encoding},
            {"range_min", config.range_min},
            {"range_max", config.range_max}};
}

nlohmann::ordered_json to_json(const ScalingParams& params) {
    return {{"v_min", to_vector(params.v_min)}, {"v_max", to_vector(params.v_max)}};
}

nlohmann::ordered_json to_json(const PercentileBins& bins) {
    auto cuts = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < bins.cuts.rows(); ++j) cuts.push_back(to_vector(bins.cuts.row(j)));
    return {{"levels", PercentileBins::levels}, {"cuts", std::move(cuts)}};
}

PreprocessConfig config_from_json(const nlohmann::ordered_json& doc) {
    PreprocessConfig c;
    c.integer_normalisation = doc.at("integer_normalisation").get<bool>();
    c.verbal_description = doc.at("verbal_description").get<bool>();
    c.relation_encoding = doc.at("relation_encoding").get<bool>();
    c.range_min = doc.at("range_min").get<int>();
    c.range_max = doc.at("range_max").get<int>();
    if (c.range_min >= c.range_max) throw InputError("range_min must be below range_max");
    return c;
}

ScalingParams scaling_from_json(const nlohmann::ordered_json& doc) {
    ScalingParams p{row_from(doc.at("v_min")), row_from(doc.at("v_max"))};
    if (p.v_min.size() != p.v_max.size()) throw InputError("scaling extrema have different lengths");
    if ((p.v_min.array() > p.v_max.array()).any()) throw InputError("scaling minimum exceeds maximum");
    return p;
}

PercentileBins bins_from_json(const nlohmann::ordered_json& doc) {
    PercentileBins bins;
    const auto& cuts = doc.at("cuts");
    bins.cuts.resize(static_cast<Eigen::Index>(cuts.size()), 5);
    for (std::size_t j = 0; j < cuts.size(); ++j) {
        const auto row = row_from(cuts[j]);
        if (row.size() != 5) throw InputError("percentile row must hold five cut points");
        bins.cuts.row(static_cast<Eigen::Index>(j)) = row;
    }
    return bins;
}

}  // namespace rftext
