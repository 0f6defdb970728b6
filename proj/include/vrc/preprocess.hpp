#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vrc/types.hpp"

namespace vrc::preprocess {

enum class TransformKind { identity, minmax01, standardize, demean, max_norm_scale, constant_scale };

std::string_view kind_name(TransformKind kind);
TransformKind kind_from_name(std::string_view name);

inline constexpr double kStdFloor = 1e-12;

/// Every kind is the affine map x -> (x - shift) .* scale, with statistics
/// taken from training rows only.
struct Transform {
    TransformKind kind = TransformKind::identity;
    Vector shift;
    Vector scale;
    // Kind-specific parameter: target max norm for max_norm_scale, the factor
    // for constant_scale.
    double parameter = 1.0;
    bool degenerate = false;  // a range, std or norm hit its floor

    Matrix apply(const Matrix& x) const;
    Matrix invert(const Matrix& x) const;
    void apply_row(double* row) const;
    void invert_row(double* row) const;
};

/// parameter: target norm for max_norm_scale (1 by default, below 1 gives
/// headroom), the factor for constant_scale; ignored otherwise.
Transform fit(TransformKind kind, const Matrix& train, double parameter = 1.0);

/// Transforms fitted in sequence, each on the previous one's output.
struct Pipeline {
    std::vector<Transform> steps;

    static Pipeline fit(const std::vector<TransformKind>& kinds, const Matrix& train,
                        const std::vector<double>& parameters = {});
    Matrix apply(const Matrix& x) const;
    Matrix invert(const Matrix& x) const;
    void apply_row(double* row) const;
    void invert_row(double* row) const;
    bool identity() const;
};

enum class EstimatorFamily { ngrc, polynomial, volterra };

/// Input transforms each estimator expects.
std::vector<TransformKind> input_pipeline(EstimatorFamily family);
/// Output transforms for open-loop covariance targets (scale by 1000, then standardize).
std::vector<TransformKind> covariance_output_pipeline();

}  // namespace vrc::preprocess
