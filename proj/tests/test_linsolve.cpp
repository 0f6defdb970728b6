#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "vrc/error.hpp"
#include "vrc/linsolve.hpp"

using namespace vrc;
using namespace vrc::linsolve;

TEST_CASE("primal ridge on scalar problems") {
    Matrix X(1, 1), Y(1, 1);
    X << 1.0;
    Y << 2.0;
    CHECK(solve_ridge_primal(X, Y, 1e-12).coefficients(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(solve_ridge_primal(X, Y, 1.0).coefficients(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(solve_ridge_primal(X, Y, 1.0, PrimalMethod::normal_equations).coefficients(0, 0) ==
          doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("primal ridge matches the LU oracle") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix X = oracle::random_matrix(rng, 20, 6), Y = oracle::random_matrix(rng, 20, 2);
        const Matrix ref = oracle::ridge_lu(X, Y, 0.1);
        CHECK(oracle::rel_err(solve_ridge_primal(X, Y, 0.1).coefficients, ref) < 1e-10);
        CHECK(oracle::rel_err(solve_ridge_primal(X, Y, 0.1, PrimalMethod::normal_equations).coefficients, ref) <
              1e-10);
    }
}

TEST_CASE("primal ridge rejects bad input") {
    Matrix X = Matrix::Ones(3, 2), Y = Matrix::Ones(3, 1);
    CHECK_THROWS_AS(solve_ridge_primal(X, Y, 0.0), InvalidInput);
    X(1, 1) = std::nan("");
    CHECK_THROWS_AS(solve_ridge_primal(X, Y, 1.0), InvalidInput);
}

TEST_CASE("primal ridge is invariant under joint row permutation") {
    std::mt19937_64 rng(12);
    const Matrix X = oracle::random_matrix(rng, 30, 5), Y = oracle::random_matrix(rng, 30, 3);
    std::vector<Index> perm(30);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix Xp(30, 5), Yp(30, 3);
    for (Index i = 0; i < 30; ++i) {
        Xp.row(i) = X.row(perm[i]);
        Yp.row(i) = Y.row(perm[i]);
    }
    CHECK(oracle::rel_err(solve_ridge_primal(Xp, Yp, 0.05).coefficients, solve_ridge_primal(X, Y, 0.05).coefficients) <
          1e-10);
}

TEST_CASE("gram ridge small cases") {
    Matrix K(1, 1), Y(1, 1);
    K << 1.0;
    Y << 1.0;
    CHECK(solve_ridge_gram(K, Y, 1.0).coefficients(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(solve_ridge_gram(K, Y, 1.0, GramMethod::factorization).coefficients(0, 0) ==
          doctest::Approx(0.5).epsilon(1e-14));
    const Matrix I = Matrix::Identity(3, 3);
    Matrix y(3, 1);
    y << 1, 2, 3;
    CHECK(oracle::rel_err(solve_ridge_gram(I, y, 1e-12).coefficients, y) < 1e-10);
}

TEST_CASE("gram ridge predictions agree with the primal solution") {
    std::mt19937_64 rng(13);
    const Matrix X = oracle::random_matrix(rng, 15, 4), Y = oracle::random_matrix(rng, 15, 2);
    const Matrix K = X * X.transpose();
    const Matrix primal = X * solve_ridge_primal(X, Y, 0.3).coefficients;
    for (auto method : {GramMethod::eigen, GramMethod::factorization}) {
        const Matrix dual = K * solve_ridge_gram(K, Y, 0.3, method).coefficients;
        CHECK(oracle::rel_err(dual, primal) < 1e-9);
    }
}

TEST_CASE("duality holds across random shapes, including singular Gram matrices") {
    std::mt19937_64 rng(14);
    std::uniform_int_distribution<int> n_dist(1, 50), N_dist(1, 20);
    for (int rep = 0; rep < 60; ++rep) {
        const Index n = n_dist(rng), N = N_dist(rng);
        const double lambda = std::pow(10.0, -1.0 - 7.0 * (rep % 8) / 7.0);
        const Matrix X = oracle::random_matrix(rng, n, N), Y = oracle::random_matrix(rng, n, 2);
        const Matrix primal = X * solve_ridge_primal(X, Y, lambda).coefficients;
        const Matrix K = X * X.transpose();
        const Matrix dual = K * solve_ridge_gram(K, Y, lambda).coefficients;
        CHECK(oracle::rel_err(dual, primal) < 1e-8);
    }
}

TEST_CASE("gram ridge rejects an asymmetric matrix") {
    Matrix K = Matrix::Identity(2, 2);
    K(0, 1) = 0.5;
    CHECK_THROWS_AS(solve_ridge_gram(K, Matrix::Ones(2, 1), 1.0), InvalidInput);
}

TEST_CASE("factorization route escalates jitter on a singular Gram matrix") {
    const Matrix K = Matrix::Ones(4, 4);  // rank one
    const auto sol = solve_ridge_gram(K, Matrix::Ones(4, 1), 1e-300, GramMethod::factorization);
    CHECK(sol.route.find("cholesky") != std::string::npos);
    CHECK(sol.coefficients.allFinite());
}

TEST_CASE("psd square root") {
    CHECK(oracle::rel_err(psd_sqrt(Matrix::Identity(2, 2)), Matrix::Identity(2, 2)) < 1e-15);
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = 4;
    D(1, 1) = 9;
    const Matrix R = psd_sqrt(D);
    CHECK(R(0, 0) == doctest::Approx(2.0));
    CHECK(R(1, 1) == doctest::Approx(3.0));
    CHECK(std::abs(R(0, 1)) < 1e-15);

    std::mt19937_64 rng(15);
    for (int rep = 0; rep < 10; ++rep) {
        const Matrix M = oracle::random_matrix(rng, 5, 5);
        const Matrix S = M * M.transpose();
        const Matrix Rs = psd_sqrt(S);
        const double scale = S.cwiseAbs().maxCoeff();
        CHECK((Rs * Rs - S).cwiseAbs().maxCoeff() <= 1e-8 * scale);
        CHECK((Rs * S - S * Rs).cwiseAbs().maxCoeff() <= 1e-8 * scale);
        CHECK((Rs - Rs.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
    Matrix bad = Matrix::Identity(2, 2);
    bad(1, 1) = -1;
    CHECK_THROWS_AS(psd_sqrt(bad), InvalidInput);
}
