#include "vrc/estimator.hpp"

#include <cmath>
#include <sstream>

#include "vrc/error.hpp"

namespace vrc::estimator {

std::string_view family_name(EstimatorFamily family) {
    switch (family) {
        case EstimatorFamily::ngrc: return "ngrc";
        case EstimatorFamily::polynomial: return "polynomial";
        case EstimatorFamily::volterra: return "volterra";
    }
    return "unknown";
}

EstimatorFamily family_from_name(std::string_view name) {
    if (name == "ngrc") return EstimatorFamily::ngrc;
    if (name == "polynomial" || name == "poly") return EstimatorFamily::polynomial;
    if (name == "volterra") return EstimatorFamily::volterra;
    throw InvalidInput("unknown estimator '" + std::string(name) + "'");
}

kernels::VolterraParams EstimatorSpec::volterra() const {
    kernels::VolterraParams v;
    v.lambda = lambda;
    v.theta = theta;
    v.M = 1.0;
    v.border = border;
    return v;
}

void EstimatorSpec::validate() const {
    if (!(lambda_reg > 0.0) || !std::isfinite(lambda_reg)) throw InvalidInput("lambda_reg must be positive");
    if (washout < 0) throw InvalidInput("washout must be non-negative");
    if (family == EstimatorFamily::volterra) {
        volterra().validate();
        if (!(norm_target > 0.0 && norm_target <= 1.0)) throw InvalidInput("norm_target must lie in (0, 1]");
    } else {
        if (tau < 1) throw InvalidInput("tau must be >= 1");
        if (p < 1) throw InvalidInput("p must be >= 1");
        if (family == EstimatorFamily::polynomial && !(c > 0.0)) throw InvalidInput("polynomial c must be positive");
    }
}

std::string EstimatorSpec::describe() const {
    std::ostringstream os;
    os.precision(6);
    os << family_name(family);
    if (family == EstimatorFamily::volterra)
        os << "(lambda=" << lambda << ", theta=" << theta << ", lambda_reg=" << lambda_reg << ", washout=" << washout
           << ")";
    else
        os << "(tau=" << tau << ", p=" << p << ", lambda_reg=" << lambda_reg << ", washout=" << washout << ")";
    return os.str();
}

const linsolve::RidgeSolution& FittedEstimator::diagnostics() const {
    return ngrc ? ngrc->diagnostics : kernel->diagnostics;
}

FittedEstimator fit(const EstimatorSpec& spec, const Matrix& inputs, const Matrix& targets) {
    spec.validate();
    if (inputs.rows() != targets.rows()) throw InvalidInput("inputs and targets disagree on length");
    if (inputs.rows() < 2) throw InvalidInput("need at least two training samples");
    if (!inputs.allFinite() || !targets.allFinite()) throw InvalidInput("training data contains non-finite values");

    FittedEstimator model;
    model.spec = spec;
    model.d_in = inputs.cols();
    model.d_out = targets.cols();

    std::vector<double> in_params;
    if (spec.family == EstimatorFamily::volterra) in_params = {1.0, spec.norm_target};
    model.input_tf = preprocess::Pipeline::fit(preprocess::input_pipeline(spec.family), inputs, in_params);
    switch (spec.outputs) {
        case OutputScaling::same_as_inputs:
            if (model.d_out != model.d_in)
                throw InvalidInput("path continuation needs equal input and output dimensions");
            model.output_tf = model.input_tf;
            break;
        case OutputScaling::covariance:
            model.output_tf = preprocess::Pipeline::fit(preprocess::covariance_output_pipeline(), targets, {1000.0, 1.0});
            break;
        case OutputScaling::none:
            model.output_tf = preprocess::Pipeline::fit({preprocess::TransformKind::identity}, targets);
            break;
    }
    const Matrix x = model.input_tf.apply(inputs);
    const Matrix y = model.output_tf.apply(targets);
    const Index n = x.rows();

    if (spec.family == EstimatorFamily::volterra) {
        kernels::KernelDescriptor kd;
        kd.kind = kernels::KernelKind::volterra;
        kd.volterra = spec.volterra();
        model.kernel = kernels::fit_kernel_model(x, y, kd, spec.lambda_reg, spec.washout);
        model.train_by_dim = x.transpose();
        return model;
    }

    const Index drop = std::max<Index>(0, spec.washout - spec.tau);
    if (drop + spec.tau > n) throw InvalidInput("washout and tau leave no training samples");
    const Matrix xs = x.bottomRows(n - drop);
    const Matrix ys = y.bottomRows(n - drop);
    if (spec.family == EstimatorFamily::ngrc) {
        model.ngrc = ngrc::fit_ngrc(xs, ys, spec.tau, spec.p, spec.lambda_reg);
    } else {
        kernels::KernelDescriptor kd;
        kd.kind = kernels::KernelKind::polynomial;
        kd.tau = spec.tau;
        kd.p = spec.p;
        kd.c = spec.c;
        model.kernel = kernels::fit_kernel_model(xs, ys, kd, spec.lambda_reg, spec.tau);
    }
    const Index keep = spec.tau - 1;
    model.context.resize(keep * model.d_in);
    for (Index i = 0; i < keep; ++i)
        model.context.segment(i * model.d_in, model.d_in) = x.row(n - keep + i).transpose();
    return model;
}

Stream::Stream(const FittedEstimator& model) : model_(&model) {
    if (model.spec.family == EstimatorFamily::volterra) {
        column_ = model.kernel->last_column;
    } else {
        const Index w = model.spec.tau * model.d_in;
        // Each push shifts left by one sample, so the context starts one slot in.
        window_ = Vector::Zero(w);
        window_.tail(w - model.d_in) = model.context;
    }
    scratch_.resize(model.d_in);
}

Vector Stream::push(std::span<const double> raw_input) {
    const FittedEstimator& m = *model_;
    const Index d = m.d_in;
    if (static_cast<Index>(raw_input.size()) != d) throw InvalidInput("input has the wrong dimension");
    for (Index j = 0; j < d; ++j) scratch_(j) = raw_input[j];
    if (!scratch_.allFinite()) throw InvalidInput("non-finite input");
    m.input_tf.apply_row(scratch_.data());

    Vector y;
    if (m.spec.family == EstimatorFamily::volterra) {
        const auto params = m.kernel->kernel.volterra;
        const double norm = scratch_.norm();
        if (norm > params.M * (1.0 + kernels::kNormSlack))
            throw InvalidInput("input norm " + std::to_string(norm) + " exceeds the Volterra bound M=" +
                               std::to_string(params.M));
        kernels::volterra_next_column(m.train_by_dim, {scratch_.data(), static_cast<std::size_t>(d)}, column_,
                                      params, next_);
        column_.swap(next_);
        const Index n = column_.size();
        y = m.kernel->alpha.transpose() * column_.tail(n - m.kernel->washout);
    } else {
        const Index w = window_.size();
        if (w > d) window_.head(w - d) = window_.segment(d, w - d).eval();
        window_.tail(d) = scratch_;
        if (m.ngrc) {
            y = ngrc::predict_ngrc(*m.ngrc, {window_.data(), static_cast<std::size_t>(w)});
        } else {
            const Matrix row = window_.transpose();
            y = kernels::predict_kernel(*m.kernel, row).row(0).transpose();
        }
    }
    if (!y.allFinite()) throw InvalidInput("prediction is not finite");
    m.output_tf.invert_row(y.data());
    return y;
}

Matrix FittedEstimator::predict_open_loop(const Matrix& raw_inputs) const {
    if (raw_inputs.cols() != d_in) throw InvalidInput("test inputs have the wrong dimension");
    Stream s = stream();
    Matrix out(raw_inputs.rows(), d_out);
    Vector row(d_in);
    for (Index i = 0; i < raw_inputs.rows(); ++i) {
        row = raw_inputs.row(i).transpose();
        out.row(i) = s.push({row.data(), static_cast<std::size_t>(d_in)}).transpose();
    }
    return out;
}

}  // namespace vrc::estimator
