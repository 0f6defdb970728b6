#pragma once

#include <string>

#include "vrc/types.hpp"

namespace vrc {

/// Uniformly sampled multivariate series: values is n x d, row t is time t*dt.
struct TimeSeries {
    Matrix values;
    double dt = 1.0;
    std::string origin;

    Index length() const { return values.rows(); }
    Index dim() const { return values.cols(); }
    void validate() const;
};

}  // namespace vrc
