#include "vrc/preprocess.hpp"

#include <cmath>

#include "vrc/error.hpp"

namespace vrc::preprocess {

namespace {
constexpr std::pair<TransformKind, std::string_view> kNames[] = {
    {TransformKind::identity, "identity"},         {TransformKind::minmax01, "minmax01"},
    {TransformKind::standardize, "standardize"},   {TransformKind::demean, "demean"},
    {TransformKind::max_norm_scale, "max-norm-scale"}, {TransformKind::constant_scale, "constant-scale"},
};
}  // namespace

std::string_view kind_name(TransformKind kind) {
    for (const auto& [k, name] : kNames)
        if (k == kind) return name;
    return "unknown";
}

TransformKind kind_from_name(std::string_view name) {
    for (const auto& [k, n] : kNames)
        if (n == name) return k;
    throw InvalidInput("unknown transform '" + std::string(name) + "'");
}

Transform fit(TransformKind kind, const Matrix& train, double parameter) {
    if (train.rows() < 1 || train.cols() < 1) throw InvalidInput("cannot fit a transform on empty data");
    if (!train.allFinite()) throw InvalidInput("training data contains non-finite values");
    const Index d = train.cols();
    const double n = static_cast<double>(train.rows());
    Transform t;
    t.kind = kind;
    t.parameter = parameter;
    t.shift = Vector::Zero(d);
    t.scale = Vector::Ones(d);
    switch (kind) {
        case TransformKind::identity:
            break;
        case TransformKind::minmax01:
            for (Index j = 0; j < d; ++j) {
                const double lo = train.col(j).minCoeff(), hi = train.col(j).maxCoeff();
                double range = hi - lo;
                if (range < kStdFloor) {
                    range = kStdFloor;
                    t.degenerate = true;
                }
                t.shift(j) = lo;
                t.scale(j) = 1.0 / range;
            }
            break;
        case TransformKind::standardize:
            for (Index j = 0; j < d; ++j) {
                const double mean = train.col(j).mean();
                double sd = std::sqrt((train.col(j).array() - mean).square().sum() / n);
                if (sd < kStdFloor) {
                    sd = kStdFloor;
                    t.degenerate = true;
                }
                t.shift(j) = mean;
                t.scale(j) = 1.0 / sd;
            }
            break;
        case TransformKind::demean:
            t.shift = train.colwise().mean().transpose();
            break;
        case TransformKind::max_norm_scale: {
            if (!(parameter > 0.0)) throw InvalidInput("max-norm-scale target must be positive");
            double norm = train.rowwise().norm().maxCoeff();
            if (norm < kStdFloor) {
                norm = kStdFloor;
                t.degenerate = true;
            }
            t.scale.setConstant(parameter / norm);
            break;
        }
        case TransformKind::constant_scale:
            if (!(parameter != 0.0) || !std::isfinite(parameter)) throw InvalidInput("constant scale must be nonzero");
            t.scale.setConstant(parameter);
            break;
    }
    return t;
}

Matrix Transform::apply(const Matrix& x) const {
    if (x.cols() != shift.size()) throw InvalidInput("transform applied to data of the wrong width");
    return ((x.rowwise() - shift.transpose()).array().rowwise() * scale.transpose().array()).matrix();
}

Matrix Transform::invert(const Matrix& x) const {
    if (x.cols() != shift.size()) throw InvalidInput("transform inverted on data of the wrong width");
    return ((x.array().rowwise() / scale.transpose().array()).matrix().rowwise() + shift.transpose());
}

void Transform::apply_row(double* row) const {
    for (Index j = 0; j < shift.size(); ++j) row[j] = (row[j] - shift(j)) * scale(j);
}

void Transform::invert_row(double* row) const {
    for (Index j = 0; j < shift.size(); ++j) row[j] = row[j] / scale(j) + shift(j);
}

Pipeline Pipeline::fit(const std::vector<TransformKind>& kinds, const Matrix& train,
                       const std::vector<double>& parameters) {
    Pipeline p;
    Matrix current = train;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        const double param = i < parameters.size() ? parameters[i] : 1.0;
        p.steps.push_back(preprocess::fit(kinds[i], current, param));
        current = p.steps.back().apply(current);
    }
    return p;
}

Matrix Pipeline::apply(const Matrix& x) const {
    Matrix out = x;
    for (const auto& s : steps) out = s.apply(out);
    return out;
}

Matrix Pipeline::invert(const Matrix& x) const {
    Matrix out = x;
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) out = it->invert(out);
    return out;
}

void Pipeline::apply_row(double* row) const {
    for (const auto& s : steps) s.apply_row(row);
}

void Pipeline::invert_row(double* row) const {
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) it->invert_row(row);
}

bool Pipeline::identity() const {
    for (const auto& s : steps)
        if (s.kind != TransformKind::identity) return false;
    return true;
}

std::vector<TransformKind> input_pipeline(EstimatorFamily family) {
    switch (family) {
        case EstimatorFamily::ngrc: return {TransformKind::identity};
        case EstimatorFamily::polynomial: return {TransformKind::minmax01};
        case EstimatorFamily::volterra: return {TransformKind::demean, TransformKind::max_norm_scale};
    }
    throw InvalidInput("unknown estimator family");
}

std::vector<TransformKind> covariance_output_pipeline() {
    return {TransformKind::constant_scale, TransformKind::standardize};
}

}  // namespace vrc::preprocess
