#pragma once

#include <Eigen/Dense>

namespace dcn {

// n observations in d dimensions, one row per observation.
struct Sample {
    Eigen::MatrixXd values;

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index d() const { return values.cols(); }
};

} // namespace dcn
