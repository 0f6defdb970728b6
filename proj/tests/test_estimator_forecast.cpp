#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "vrc/error.hpp"
#include "vrc/estimator.hpp"
#include "vrc/forecast.hpp"
#include "vrc/serialize.hpp"

using namespace vrc;
using namespace vrc::estimator;

namespace {

Matrix volterra_oracle(const Matrix& z, double lambda, double theta) {
    const Index n = z.rows();
    Matrix K = Matrix::Constant(n + 1, n + 1, 1.0 / (1.0 - lambda * lambda));
    for (Index i = 1; i <= n; ++i)
        for (Index j = 1; j <= n; ++j)
            K(i, j) = 1.0 + lambda * lambda * K(i - 1, j - 1) / (1.0 - theta * theta * z.row(i - 1).dot(z.row(j - 1)));
    return K.bottomRightCorner(n, n);
}

// Noisy rotation in the plane; bounded and deterministic.
Matrix rotation_series(Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.05);
    Matrix x(n, 2);
    x.row(0) << 1.0, 0.0;
    const double c = std::cos(0.3), s = std::sin(0.3);
    for (Index t = 1; t < n; ++t) {
        x(t, 0) = 0.98 * (c * x(t - 1, 0) - s * x(t - 1, 1)) + noise(rng);
        x(t, 1) = 0.98 * (s * x(t - 1, 0) + c * x(t - 1, 1)) + noise(rng);
    }
    return x;
}

}  // namespace

TEST_CASE("Volterra estimator matches a direct kernel ridge oracle") {
    const Matrix x = rotation_series(90, 71);
    const Matrix inputs = x.topRows(70), targets = x.block(1, 0, 70, 2), test = x.block(70, 0, 10, 2);
    EstimatorSpec spec;
    spec.family = EstimatorFamily::volterra;
    spec.lambda = 0.6;
    spec.theta = 0.5;
    spec.lambda_reg = 1e-3;
    spec.washout = 5;
    const auto model = fit(spec, inputs, targets);

    Matrix all(80, 2);
    all << inputs, test;
    const Matrix u = model.input_tf.apply(all);
    CHECK(u.topRows(70).rowwise().norm().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
    const Matrix K = volterra_oracle(u, 0.6, 0.5);
    const Matrix Ktrain = K.block(5, 5, 65, 65);
    const Matrix Yt = model.output_tf.apply(targets).bottomRows(65);
    const Matrix alpha = (Ktrain + 1e-3 * Matrix::Identity(65, 65)).partialPivLu().solve(Yt);
    const Matrix expected = model.output_tf.invert(K.block(70, 5, 10, 65) * alpha);
    const Matrix got = model.predict_open_loop(test);
    CHECK(oracle::rel_err(got, expected) < 1e-8);

    // Streaming one step at a time yields the same numbers.
    auto stream = model.stream();
    for (Index j = 0; j < 10; ++j) {
        const Vector row = test.row(j).transpose();
        const Vector y = stream.push({row.data(), 2});
        CHECK((y.transpose() - got.row(j)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("NG-RC estimator continues its training context") {
    const Matrix x = rotation_series(120, 72);
    EstimatorSpec spec;
    spec.family = EstimatorFamily::ngrc;
    spec.tau = 3;
    spec.p = 2;
    spec.lambda_reg = 1e-6;
    spec.washout = 3;
    const auto model = fit(spec, x.topRows(100), x.block(1, 0, 100, 2));
    const Matrix test = x.block(100, 0, 5, 2);
    const Matrix pred = model.predict_open_loop(test);
    const auto table = ngrc::build_exponent_table(3, 2, 2);
    for (Index j = 0; j < 5; ++j) {
        // Delay vector ending at global row 100 + j, oldest lag first.
        std::vector<double> v;
        for (Index lag = 2; lag >= 0; --lag)
            for (Index k = 0; k < 2; ++k) v.push_back(x(100 + j - lag, k));
        const Vector y = model.ngrc->weights.transpose() * ngrc::ngrc_features(v, table);
        CHECK((y.transpose() - pred.row(j)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("path continuation recovers an exact linear map") {
    Matrix x(60, 2);
    x.row(0) << 1.0, 0.5;
    for (Index t = 1; t < 60; ++t) {
        x(t, 0) = 0.9 * x(t - 1, 0) - 0.2 * x(t - 1, 1);
        x(t, 1) = 0.1 * x(t - 1, 0) + 0.95 * x(t - 1, 1);
    }
    EstimatorSpec spec;
    spec.family = EstimatorFamily::ngrc;
    spec.tau = 1;
    spec.p = 1;
    spec.lambda_reg = 1e-14;
    const auto model = fit(spec, x.topRows(39), x.block(1, 0, 39, 2));
    const auto run = forecast::path_continue(model, x.block(39, 0, 1, 2), x.bottomRows(20));
    CHECK(!run.truncated);
    CHECK(run.completed() == 20);
    CHECK(oracle::rel_err(run.predicted, x.bottomRows(20)) < 1e-8);
    const Matrix r = forecast::rollout(model, x.block(39, 0, 1, 2), 20);
    CHECK(r == run.predicted);
}

TEST_CASE("Volterra rollout is truncated when inputs leave the norm ball") {
    const Matrix x = rotation_series(60, 73);
    EstimatorSpec spec;
    spec.family = EstimatorFamily::volterra;
    spec.lambda_reg = 1e-4;
    const auto model = fit(spec, x.topRows(40), x.block(1, 0, 40, 2));
    Matrix wild = x.block(40, 0, 3, 2);
    wild(2, 0) = 1e3;
    const auto run = forecast::open_loop(model, wild, x.block(41, 0, 3, 2));
    CHECK(run.truncated);
    CHECK(run.failure_step == 2);
    CHECK(run.completed() == 2);
    CHECK(!run.failure.empty());
}

TEST_CASE("normalized error and valid time") {
    const Index h = 400;
    Matrix ref(h, 1), pred(h, 1);
    for (Index t = 0; t < h; ++t) ref(t, 0) = std::sin(0.05 * double(t));
    pred = ref;
    const Vector e0 = forecast::normalized_errors(ref, pred);
    CHECK(e0.maxCoeff() == 0.0);
    auto v = forecast::valid_time(ref, pred, 0.9056, 0.005);
    CHECK(v.censored);
    CHECK(v.step == h);

    const double rms = std::sqrt((ref.array() - ref.mean()).square().mean());
    for (Index t = 99; t < h; ++t) pred(t, 0) += 0.5 * rms;  // crosses at 1-based step 100
    v = forecast::valid_time(ref, pred, 0.9056, 0.005);
    CHECK(!v.censored);
    CHECK(v.step == 100);
    CHECK(v.t_valid == doctest::Approx(0.4528).epsilon(1e-12));
}

TEST_CASE("a truncated run fails on the step after it stopped") {
    forecast::ForecastRun run;
    run.horizon = 50;
    run.reference = Matrix::Zero(50, 1);
    for (Index t = 0; t < 50; ++t) run.reference(t, 0) = double(t % 7);
    run.predicted = run.reference.topRows(12);
    run.truncated = true;
    const auto v = forecast::valid_time(run, 1.0, 0.1);
    CHECK(v.step == 13);
    CHECK(v.t_valid == doctest::Approx(1.3));
}

TEST_CASE("fitted models survive a JSON round trip") {
    const Matrix x = rotation_series(80, 74);
    for (auto fam : {EstimatorFamily::ngrc, EstimatorFamily::polynomial, EstimatorFamily::volterra}) {
        EstimatorSpec spec;
        spec.family = fam;
        spec.tau = 2;
        spec.p = 2;
        spec.lambda_reg = 1e-5;
        spec.washout = 2;
        const auto model = fit(spec, x.topRows(60), x.block(1, 0, 60, 2));
        const auto text = serialize::model_to_json(model).dump();
        const auto back = serialize::model_from_json(serialize::Json::parse(text));
        const Matrix test = x.block(60, 0, 10, 2);
        CHECK(back.predict_open_loop(test) == model.predict_open_loop(test));
    }
}

TEST_CASE("spec validation") {
    EstimatorSpec s;
    s.tau = 0;
    CHECK_THROWS_AS(s.validate(), InvalidInput);
    s = {};
    s.family = EstimatorFamily::volterra;
    s.lambda = 0.99;
    s.theta = 0.5;
    CHECK_THROWS_AS(s.validate(), InvalidInput);
    s = {};
    s.lambda_reg = 0;
    CHECK_THROWS_AS(s.validate(), InvalidInput);
    CHECK(family_from_name(family_name(EstimatorFamily::polynomial)) == EstimatorFamily::polynomial);
}
