#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace rftext {

/// N x F feature table. Row-major so that one example is a contiguous row.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A read-only view of one feature vector (a matrix row or a standalone RowVectorXd).
using FeatureRow = Eigen::Ref<const Eigen::RowVectorXd>;

/// Raised for bad user input: malformed files, invalid parameters, inconsistent artifacts.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rftext
