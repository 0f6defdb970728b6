#include <doctest.h>

#include "oracles.hpp"
#include "vrc/error.hpp"
#include "vrc/preprocess.hpp"

using namespace vrc;
using namespace vrc::preprocess;

TEST_CASE("min-max maps the training range onto the unit interval") {
    Matrix x(3, 2);
    x << 1, -2, 3, 0, 5, 2;
    const auto t = fit(TransformKind::minmax01, x);
    const Matrix y = t.apply(x);
    CHECK(y.col(0).minCoeff() == 0.0);
    CHECK(y.col(0).maxCoeff() == 1.0);
    CHECK(y(1, 1) == doctest::Approx(0.5));
    CHECK((t.invert(y) - x).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("standardize uses the population standard deviation") {
    Matrix x(4, 1);
    x << 1, 2, 3, 4;
    const Matrix y = fit(TransformKind::standardize, x).apply(x);
    CHECK(std::abs(y.mean()) < 1e-15);
    CHECK((y.array().square().sum() / 4.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("demean then max-norm scaling with headroom") {
    std::mt19937_64 rng(61);
    const Matrix x = oracle::random_matrix(rng, 50, 3, 2.0, 7.0);
    const auto pipe = Pipeline::fit({TransformKind::demean, TransformKind::max_norm_scale}, x, {1.0, 0.8});
    const Matrix y = pipe.apply(x);
    CHECK(y.colwise().mean().cwiseAbs().maxCoeff() < 1e-14);
    CHECK(y.rowwise().norm().maxCoeff() == doctest::Approx(0.8).epsilon(1e-14));
    CHECK((pipe.invert(y) - x).cwiseAbs().maxCoeff() < 1e-12);
    Vector row = x.row(4).transpose();
    pipe.apply_row(row.data());
    CHECK((row - y.row(4).transpose()).cwiseAbs().maxCoeff() == 0.0);
    pipe.invert_row(row.data());
    CHECK((row - x.row(4).transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("statistics come from the fitting data only") {
    Matrix train(2, 1), test(1, 1);
    train << 0, 10;
    test << 20;
    CHECK(fit(TransformKind::minmax01, train).apply(test)(0, 0) == 2.0);
}

TEST_CASE("constant columns are flagged rather than divided by zero") {
    const Matrix x = Matrix::Constant(5, 2, 3.0);
    const auto t = fit(TransformKind::standardize, x);
    CHECK(t.degenerate);
    CHECK(t.apply(x).allFinite());
}

TEST_CASE("covariance output pipeline") {
    std::mt19937_64 rng(62);
    const Matrix y = oracle::random_matrix(rng, 30, 3, 1e-4, 1e-3);
    const auto kinds = covariance_output_pipeline();
    REQUIRE(kinds.size() == 2);
    CHECK(kinds[0] == TransformKind::constant_scale);
    const auto pipe = Pipeline::fit(kinds, y, {1000.0, 1.0});
    CHECK(pipe.steps[0].scale(0) == 1000.0);
    CHECK((pipe.invert(pipe.apply(y)) - y).cwiseAbs().maxCoeff() < 1e-17);
}

TEST_CASE("estimator input pipelines and names") {
    CHECK(input_pipeline(EstimatorFamily::ngrc) == std::vector<TransformKind>{TransformKind::identity});
    CHECK(input_pipeline(EstimatorFamily::polynomial) == std::vector<TransformKind>{TransformKind::minmax01});
    CHECK(input_pipeline(EstimatorFamily::volterra) ==
          std::vector<TransformKind>{TransformKind::demean, TransformKind::max_norm_scale});
    for (auto k : {TransformKind::identity, TransformKind::minmax01, TransformKind::standardize, TransformKind::demean,
                   TransformKind::max_norm_scale, TransformKind::constant_scale})
        CHECK(kind_from_name(kind_name(k)) == k);
    CHECK_THROWS(kind_from_name("bogus"));
    CHECK_THROWS_AS(fit(TransformKind::minmax01, Matrix::Constant(2, 1, std::nan(""))), InvalidInput);
}
