#include "vrc/forecast.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "vrc/error.hpp"

namespace vrc::forecast {

namespace {

struct RollResult {
    Matrix predicted;
    bool truncated = false;
    Index failure_step = -1;
    std::string failure;
};

RollResult roll(const estimator::FittedEstimator& model, const Matrix& warm, Index h) {
    if (warm.rows() < 1) throw InvalidInput("path continuation needs at least one warm-up input");
    if (model.d_in != model.d_out) throw InvalidInput("path continuation needs equal input and output dimensions");
    if (h < 1) throw InvalidInput("horizon must be positive");
    RollResult r;
    r.predicted.resize(h, model.d_out);
    estimator::Stream s = model.stream();
    Index step = 0;
    try {
        Vector y, row(model.d_in);
        for (Index i = 0; i < warm.rows(); ++i) {
            row = warm.row(i).transpose();
            y = s.push({row.data(), static_cast<std::size_t>(row.size())});
        }
        for (step = 0; step < h; ++step) {
            r.predicted.row(step) = y.transpose();
            if (step + 1 < h) y = s.push({y.data(), static_cast<std::size_t>(y.size())});
        }
    } catch (const InvalidInput& e) {
        r.truncated = true;
        r.failure_step = step;
        r.failure = e.what();
        r.predicted.conservativeResize(step, Eigen::NoChange);
    }
    return r;
}

}  // namespace

ForecastRun path_continue(const estimator::FittedEstimator& model, const Matrix& warm_inputs,
                          const Matrix& reference) {
    if (reference.cols() != model.d_out) throw InvalidInput("reference has the wrong dimension");
    RollResult r = roll(model, warm_inputs, reference.rows());
    ForecastRun run;
    run.mode = Mode::path_continuation;
    run.horizon = reference.rows();
    run.predicted = std::move(r.predicted);
    run.reference = reference;
    run.estimator = model.spec.describe();
    run.truncated = r.truncated;
    run.failure_step = r.failure_step;
    run.failure = std::move(r.failure);
    return run;
}

Matrix rollout(const estimator::FittedEstimator& model, const Matrix& warm_inputs, Index h) {
    RollResult r = roll(model, warm_inputs, h);
    if (r.truncated) throw InvalidInput("rollout failed at step " + std::to_string(r.failure_step) + ": " + r.failure);
    return r.predicted;
}

ForecastRun open_loop(const estimator::FittedEstimator& model, const Matrix& test_inputs, const Matrix& reference) {
    if (test_inputs.rows() != reference.rows()) throw InvalidInput("test inputs and reference disagree on length");
    if (reference.cols() != model.d_out) throw InvalidInput("reference has the wrong dimension");
    ForecastRun run;
    run.mode = Mode::open_loop;
    run.horizon = reference.rows();
    run.reference = reference;
    run.estimator = model.spec.describe();
    run.predicted.resize(reference.rows(), model.d_out);
    estimator::Stream s = model.stream();
    Vector row(model.d_in);
    Index i = 0;
    try {
        for (; i < test_inputs.rows(); ++i) {
            row = test_inputs.row(i).transpose();
            run.predicted.row(i) = s.push({row.data(), static_cast<std::size_t>(row.size())}).transpose();
        }
    } catch (const InvalidInput& e) {
        run.truncated = true;
        run.failure_step = i;
        run.failure = e.what();
        run.predicted.conservativeResize(i, Eigen::NoChange);
    }
    return run;
}

Vector normalized_errors(const Matrix& reference, const Matrix& predicted) {
    if (reference.cols() != predicted.cols()) throw InvalidInput("reference and prediction widths differ");
    if (predicted.rows() > reference.rows()) throw InvalidInput("prediction is longer than the reference");
    if (reference.rows() < 1) throw InvalidInput("empty reference");
    const Eigen::RowVectorXd mean = reference.colwise().mean();
    const double rms = std::sqrt((reference.rowwise() - mean).rowwise().squaredNorm().mean());
    if (!(rms > 0.0)) throw InvalidInput("reference has zero spread; normalized error undefined");
    return (predicted - reference.topRows(predicted.rows())).rowwise().norm() / rms;
}

namespace {

ValidTime finish(const Vector& e, Index horizon, bool truncated, double lyap, double dt, double threshold) {
    if (!(lyap > 0.0)) throw InvalidInput("Lyapunov exponent must be positive");
    if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
    ValidTime v;
    Index step = -1;
    for (Index t = 0; t < e.size(); ++t)
        if (e(t) > threshold) {
            step = t + 1;
            break;
        }
    if (step < 0 && truncated) step = e.size() + 1;
    if (step < 0) {
        v.censored = true;
        v.step = horizon;
    } else {
        v.step = step;
    }
    v.t_valid = static_cast<double>(v.step) * dt * lyap;
    return v;
}

}  // namespace

ValidTime valid_time(const Matrix& reference, const Matrix& predicted, double lyapunov_exponent, double dt,
                     double threshold) {
    if (reference.rows() != predicted.rows() || reference.cols() != predicted.cols())
        throw InvalidInput("reference and prediction shapes differ");
    return finish(normalized_errors(reference, predicted), reference.rows(), false, lyapunov_exponent, dt, threshold);
}

ValidTime valid_time(const ForecastRun& run, double lyapunov_exponent, double dt, double threshold) {
    return finish(normalized_errors(run.reference, run.predicted), run.horizon, run.truncated, lyapunov_exponent, dt,
                  threshold);
}

void save_run_csv(const ForecastRun& run, double dt, const std::filesystem::path& path,
                  const std::vector<std::string>& comments) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    const Index d = run.reference.cols();
    char buf[32];
    auto put = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        f << buf;
    };
    f << "# dt=";
    put(dt);
    f << '\n';
    f << "# estimator=" << run.estimator << '\n';
    for (const auto& c : comments) f << "# " << c << '\n';
    if (run.truncated) f << "# truncated_at=" << run.failure_step << " reason=" << run.failure << '\n';
    f << 't';
    for (Index j = 0; j < d; ++j) f << ",ref_c" << j;
    for (Index j = 0; j < d; ++j) f << ",pred_c" << j;
    f << ",err\n";
    const Vector e = normalized_errors(run.reference, run.predicted);
    for (Index i = 0; i < run.completed(); ++i) {
        put(static_cast<double>(i) * dt);
        for (Index j = 0; j < d; ++j) {
            f << ',';
            put(run.reference(i, j));
        }
        for (Index j = 0; j < d; ++j) {
            f << ',';
            put(run.predicted(i, j));
        }
        f << ',';
        put(e(i));
        f << '\n';
    }
}

}  // namespace vrc::forecast
