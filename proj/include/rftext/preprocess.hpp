#pragma once

#include "rftext/dataset.hpp"
#include "rftext/types.hpp"

#include <json.hpp>

#include <array>
#include <span>
#include <string>
#include <string_view>

namespace rftext {

/// Switches for the three numeric-to-text transforms:
/// integer normalisation (IN), verbal description (VD) and relation encoding (RE).
struct PreprocessConfig {
    bool integer_normalisation = false;
    bool verbal_description = false;
    bool relation_encoding = false;
    int range_min = 0;
    int range_max = 99;

    /// Short tag such as "IN+VD+RE", or "none".
    std::string tag() const;

    static PreprocessConfig from_tag(std::string_view tag);

    /// All eight IN/VD/RE combinations, in bit order (IN is the lowest bit).
    static std::array<PreprocessConfig, 8> all();
};

/// Per-feature training extrema.
struct ScalingParams {
    Eigen::RowVectorXd v_min;
    Eigen::RowVectorXd v_max;
};

ScalingParams fit_scaling(const Dataset& train);

/// Affine map of v into [range_min, range_max], rounded half away from zero and
/// clipped. A constant feature maps to range_min.
int scale_value(const ScalingParams& params, int feature, double v, const PreprocessConfig& config);

/// scale_value applied to every cell, as doubles.
FeatureMatrix scale_matrix(const ScalingParams& params, const FeatureMatrix& x, const PreprocessConfig& config);

/// Cut points per feature at the 0.1, 25, 50, 75 and 99.9 percentiles.
struct PercentileBins {
    static constexpr std::array<double, 5> levels{0.001, 0.25, 0.50, 0.75, 0.999};
    Eigen::Matrix<double, Eigen::Dynamic, 5, Eigen::RowMajor> cuts;  ///< F x 5
};

/// Quantile of sorted values by linear interpolation between order statistics.
double linear_quantile(std::span<const double> sorted, double q);

PercentileBins fit_percentiles(const Dataset& train);

enum class VerbalClass { LowerOutlier, LowerWhisker, Median, UpperWhisker, UpperOutlier };

std::string_view to_string(VerbalClass c);

/// Box-plot class of v: below p0.1 | [p0.1, p25) | [p25, p75] | (p75, p99.9] | above p99.9.
VerbalClass describe_value(const PercentileBins& bins, int feature, double v);

/// "is less than" / "is greater than" with RE, "<=" / ">" without.
std::string_view encode_relation(int direction, const PreprocessConfig& config);

nlohmann::ordered_json to_json(const PreprocessConfig& config);
nlohmann::ordered_json to_json(const ScalingParams& params);
nlohmann::ordered_json to_json(const PercentileBins& bins);
PreprocessConfig config_from_json(const nlohmann::ordered_json& doc);
ScalingParams scaling_from_json(const nlohmann::ordered_json& doc);
PercentileBins bins_from_json(const nlohmann::ordered_json& doc);

}  // namespace rftext
