#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vrc/estimator.hpp"

namespace vrc::forecast {

enum class Mode { path_continuation, open_loop };

struct ForecastRun {
    Mode mode = Mode::path_continuation;
    Index horizon = 0;     // requested steps
    Matrix predicted;      // completed steps x d (fewer than horizon if truncated)
    Matrix reference;      // horizon x d
    std::string estimator;
    bool truncated = false;
    Index failure_step = -1;  // 0-based step at which the estimator failed
    std::string failure;

    Index completed() const { return predicted.rows(); }
};

/// Feeds the warm-up inputs (which continue the training inputs), then rolls
/// the model forward on its own predictions for reference.rows() steps.
ForecastRun path_continue(const estimator::FittedEstimator& model, const Matrix& warm_inputs, const Matrix& reference);

/// Same without a reference; the run's reference block is left empty.
Matrix rollout(const estimator::FittedEstimator& model, const Matrix& warm_inputs, Index h);

ForecastRun open_loop(const estimator::FittedEstimator& model, const Matrix& test_inputs, const Matrix& reference);

/// e(t) = |yhat_t - y_t| / RMS(|y - mean(y)|) with the RMS over all reference rows.
Vector normalized_errors(const Matrix& reference, const Matrix& predicted);

struct ValidTime {
    double t_valid = 0;    // Lyapunov times
    Index step = 0;        // 1-based first index with e > threshold, or the horizon when censored
    bool censored = false;
};

ValidTime valid_time(const Matrix& reference, const Matrix& predicted, double lyapunov_exponent, double dt,
                     double threshold = 0.2);
/// A truncated run counts as exceeding the threshold right after it stopped.
ValidTime valid_time(const ForecastRun& run, double lyapunov_exponent, double dt, double threshold = 0.2);

/// Columns: t, ref_c*, pred_c*, err (normalized error).
void save_run_csv(const ForecastRun& run, double dt, const std::filesystem::path& path,
                  const std::vector<std::string>& comments = {});

}  // namespace vrc::forecast
