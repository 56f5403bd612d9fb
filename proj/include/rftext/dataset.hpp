#pragma once

#include "rftext/types.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rftext {

/// Tabular classification data: features, feature names, integer labels and class names.
struct Dataset {
    FeatureMatrix features;
    std::vector<std::string> feature_names;
    std::vector<int> labels;
    std::vector<std::string> class_names;

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index cols() const { return features.cols(); }
    int n_classes() const { return static_cast<int>(class_names.size()); }

    /// Rows selected by `indices`, in that order. Metadata is shared unchanged.
    Dataset subset(std::span<const std::size_t> indices) const;

    /// Throws InputError if any structural invariant is broken.
    void check() const;
};

/// Reads a CSV whose header holds the feature names followed by a final "label" column.
/// Class ids are the positions of the label strings in sorted distinct order.
Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(std::istream& in, std::string_view source = "<stream>");

enum class Partition : std::uint8_t { Train, Validation, Test };

std::string_view to_string(Partition p);
Partition partition_from_string(std::string_view s);

struct SplitFractions {
    double train = 0.7;
    double validation = 0.1;
    double test = 0.2;
};

struct SplitAssignment {
    std::vector<Partition> partition;  ///< indexed by example
    std::uint64_t seed = 0;

    std::vector<std::size_t> indices(Partition p) const;
};

/// Stratified train/validation/test split at group level: all examples sharing a
/// group id go to the same partition. Per class, groups are shuffled and
/// allocated to partitions by largest remainder on fraction x group count.
SplitAssignment grouped_stratified_split(const Dataset& dataset,
                                         std::span<const std::int64_t> group_ids,
                                         const SplitFractions& fractions,
                                         std::uint64_t seed);

/// Largest-remainder apportionment of `total` items over `weights` (summing to 1).
/// Remainder ties go to the earlier slot.
std::vector<std::size_t> largest_remainder(std::size_t total, std::span<const double> weights);

}  // namespace rftext
