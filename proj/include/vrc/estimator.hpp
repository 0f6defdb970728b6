#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>

#include "vrc/kernels.hpp"
#include "vrc/ngrc.hpp"
#include "vrc/preprocess.hpp"

namespace vrc::estimator {

using preprocess::EstimatorFamily;

std::string_view family_name(EstimatorFamily family);
EstimatorFamily family_from_name(std::string_view name);

/// How targets are normalized before fitting.
enum class OutputScaling {
    same_as_inputs,  // path continuation: predictions are fed back as inputs
    covariance,      // scale by 1000 then standardize
    none,
};

struct EstimatorSpec {
    EstimatorFamily family = EstimatorFamily::ngrc;
    int tau = 1;
    int p = 2;
    double c = 1.0;
    double lambda = 0.5;  // Volterra
    double theta = 0.5;   // Volterra
    double lambda_reg = 1e-6;
    Index washout = 0;
    // Max input norm after the Volterra scaling; values below 1 leave room for
    // test inputs that exceed the training range.
    double norm_target = 1.0;
    kernels::VolterraBorder border = kernels::VolterraBorder::zero_padded;
    OutputScaling outputs = OutputScaling::same_as_inputs;

    void validate() const;
    std::string describe() const;
    kernels::VolterraParams volterra() const;
};

class FittedEstimator;

/// Sequential predictor: each push consumes the next raw input and returns the
/// raw-unit output for that time step. Holds its own history; one writer.
class Stream {
  public:
    explicit Stream(const FittedEstimator& model);
    Vector push(std::span<const double> raw_input);

  private:
    const FittedEstimator* model_;
    Vector window_;  // lagged: transformed delay vector, oldest lag first
    Vector column_;  // Volterra: latest Gram column over the training inputs
    Vector next_;
    Vector scratch_;
};

class FittedEstimator {
  public:
    EstimatorSpec spec;
    Index d_in = 0;
    Index d_out = 0;
    preprocess::Pipeline input_tf;
    preprocess::Pipeline output_tf;
    std::optional<ngrc::NgrcModel> ngrc;
    std::optional<kernels::KernelModel> kernel;
    // Lagged estimators: the last tau-1 transformed training inputs, flattened.
    Vector context;
    // Volterra: transformed training inputs laid out d x n.
    Matrix train_by_dim;

    Stream stream() const { return Stream(*this); }
    /// One prediction per row of raw test inputs that continue the training inputs.
    Matrix predict_open_loop(const Matrix& raw_inputs) const;
    /// Fit diagnostics of the underlying ridge solve.
    const linsolve::RidgeSolution& diagnostics() const;
};

/// inputs and targets are n x d_in and n x d_out with row t of the targets
/// paired with inputs up to row t.
FittedEstimator fit(const EstimatorSpec& spec, const Matrix& inputs, const Matrix& targets);

}  // namespace vrc::estimator
