#include <doctest.h>

#include "oracles.hpp"
#include "vrc/error.hpp"
#include "vrc/kernels.hpp"

using namespace vrc;
using namespace vrc::kernels;

namespace {

std::vector<double> row_of(const Matrix& m, Index i) { return {m.row(i).data(), m.row(i).data() + m.cols()}; }

// Direct recursion on an (n+1)^2 table with the zero-padded border.
Matrix volterra_oracle(const Matrix& a, const Matrix& b, double lambda, double theta) {
    const double border = 1.0 / (1.0 - lambda * lambda);
    Matrix K = Matrix::Constant(a.rows() + 1, b.rows() + 1, border);
    for (Index i = 1; i <= a.rows(); ++i)
        for (Index j = 1; j <= b.rows(); ++j) {
            double ip = 0;
            for (Index k = 0; k < a.cols(); ++k) ip += a(i - 1, k) * b(j - 1, k);
            K(i, j) = 1.0 + lambda * lambda * K(i - 1, j - 1) / (1.0 - theta * theta * ip);
        }
    return K.bottomRightCorner(a.rows(), b.rows());
}

Matrix unit_ball_rows(std::mt19937_64& rng, Index n, Index d, double radius) {
    Matrix m = oracle::random_matrix(rng, n, d);
    for (Index i = 0; i < n; ++i) m.row(i) *= radius / std::max(1.0, m.row(i).norm()) / std::sqrt(double(d));
    return m;
}

}  // namespace

TEST_CASE("polynomial kernel value") {
    const double u[2] = {1, 2}, v[2] = {3, 4};
    CHECK(poly_kernel(u, v, {2, 1.0, 1}) == 144.0);
    CHECK(poly_kernel(u, v, {1, 0.0, 1}) == 11.0);
}

TEST_CASE("NG-RC kernel equals the feature inner product") {
    std::mt19937_64 rng(31);
    const auto table = ngrc::build_exponent_table(2, 2, 3);
    const Matrix a = oracle::random_matrix(rng, 2, 4);
    const auto u = row_of(a, 0), v = row_of(a, 1);
    const double direct = ngrc::ngrc_features(u, table).dot(ngrc::ngrc_features(v, table));
    CHECK(ngrc_kernel(u, v, table) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("polynomial kernel expands into weighted monomials") {
    std::mt19937_64 rng(32);
    const Matrix a = oracle::random_matrix(rng, 2, 3);
    const auto u = row_of(a, 0), v = row_of(a, 1);
    const double c = 0.7;
    const int p = 3;
    double sum = 0;
    for (const auto& e : oracle::enumerate_multi_indices(3, p)) {
        int deg = 0;
        for (int x : e) deg += x;
        sum += oracle::multinomial(p, e) * std::pow(c, p - deg) * oracle::monomial(u, e) * oracle::monomial(v, e);
    }
    CHECK(poly_kernel(u, v, {p, c, 1}) == doctest::Approx(sum).epsilon(1e-12));
}

TEST_CASE("polynomial Gram matrix") {
    std::mt19937_64 rng(33);
    const Matrix rows = oracle::random_matrix(rng, 7, 3);
    const auto G = poly_gram(rows, {3, 1.0, 1});
    for (Index i = 0; i < 7; ++i)
        for (Index j = 0; j < 7; ++j) {
            const double ip = rows.row(i).dot(rows.row(j));
            CHECK(G.values(i, j) == doctest::Approx(std::pow(1.0 + ip, 3)).epsilon(1e-13));
        }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(G.values)};
    CHECK(es.eigenvalues().minCoeff() > -1e-10 * es.eigenvalues().maxCoeff());
}

TEST_CASE("Volterra parameter validation") {
    CHECK_NOTHROW(VolterraParams{0.5, 0.5, 1.0}.validate());
    CHECK_THROWS_AS((VolterraParams{0.9, 0.5, 1.0}.validate()), InvalidInput);
    CHECK_THROWS_AS((VolterraParams{0.5, 1.0, 1.0}.validate()), InvalidInput);
    CHECK(VolterraParams{0.5, 0.5, 1.0}.border_value() == doctest::Approx(4.0 / 3.0));
    VolterraParams alt{0.5, 0.6, 1.0, VolterraBorder::theta};
    CHECK(alt.border_value() == doctest::Approx(1.0 / (1.0 - 0.36)));
}

TEST_CASE("Volterra small cases") {
    const VolterraParams params{0.5, 0.5, 1.0};
    SUBCASE("zero inputs sit at the fixed point") {
        const auto G = volterra_gram(Matrix::Zero(5, 2), params);
        CHECK((G.values.array() - 4.0 / 3.0).abs().maxCoeff() < 1e-14);
    }
    SUBCASE("single unit input") {
        Matrix z(1, 1);
        z << 1.0;
        const auto G = volterra_gram(z, params);
        CHECK(G.values(0, 0) == doctest::Approx(1.0 + 0.25 * (4.0 / 3.0) / 0.75).epsilon(1e-14));
        CHECK(G.values(0, 0) == doctest::Approx(1.4444).epsilon(1e-4));
        Matrix w(1, 1);
        w << 0.0;
        const auto E = volterra_gram_extend(z, w, params);
        CHECK(E.values(0, 0) == doctest::Approx(1.3333).epsilon(1e-4));
    }
    SUBCASE("constant unit inputs converge to the recursion fixed point") {
        const auto G = volterra_gram(Matrix::Ones(200, 1), params);
        CHECK(G.values(199, 199) == doctest::Approx(1.5).epsilon(1e-12));
    }
    CHECK_THROWS_AS(volterra_gram(Matrix::Constant(3, 1, 1.5), params), InvalidInput);
}

TEST_CASE("Volterra Gram matches the direct recursion") {
    std::mt19937_64 rng(34);
    const Matrix z = unit_ball_rows(rng, 40, 3, 1.0);
    const VolterraParams params{0.6, 0.7, 1.0};
    const auto G = volterra_gram(z, params);
    CHECK(oracle::rel_err(G.values, volterra_oracle(z, z, 0.6, 0.7)) < 1e-13);
    CHECK((G.values - G.values.transpose()).cwiseAbs().maxCoeff() == 0.0);

    const Matrix w = unit_ball_rows(rng, 12, 3, 1.0);
    Matrix all(52, 3);
    all << z, w;
    const auto E = volterra_gram_extend(z, w, params);
    CHECK(oracle::rel_err(E.values, volterra_oracle(all, all, 0.6, 0.7).topRightCorner(40, 12)) < 1e-13);
}

TEST_CASE("streaming column equals the extension block") {
    std::mt19937_64 rng(35);
    const Matrix z = unit_ball_rows(rng, 30, 2, 1.0), w = unit_ball_rows(rng, 5, 2, 1.0);
    const VolterraParams params{0.5, 0.8, 1.0};
    const auto G = volterra_gram(z, params);
    const auto E = volterra_gram_extend(z, w, params);
    const Matrix by_dim = z.transpose();
    Vector prev = G.values.col(29), next(30);
    for (Index j = 0; j < 5; ++j) {
        volterra_next_column(by_dim, row_of(w, j), prev, params, next);
        CHECK((next - Vector(E.values.col(j))).cwiseAbs().maxCoeff() < 1e-14);
        prev = next;
    }
}

TEST_CASE("truncated series converges to the recursion") {
    std::mt19937_64 rng(36);
    const VolterraParams params{0.7, 0.6, 1.0};
    const Matrix a = unit_ball_rows(rng, 25, 2, 1.0), b = unit_ball_rows(rng, 25, 2, 1.0);
    const double exact = volterra_oracle(a, b, 0.7, 0.6)(24, 24);
    for (int T : {25, 40, 80}) {
        const auto s = volterra_kernel_truncated(a, b, params, T);
        CHECK(std::abs(s.value - exact) <= s.tail_bound * (1 + 1e-12) + 1e-14);
    }
}

TEST_CASE("kernel ridge with the NG-RC kernel matches explicit NG-RC") {
    std::mt19937_64 rng(37);
    const Matrix x = oracle::random_matrix(rng, 50, 2), y = oracle::random_matrix(rng, 50, 1);
    KernelDescriptor kd;
    kd.kind = KernelKind::ngrc;
    kd.tau = 2;
    kd.p = 2;
    const auto km = fit_kernel_model(x, y, kd, 1e-2, 2);
    const auto nm = ngrc::fit_ngrc(x, y, 2, 2, 1e-2);
    const Matrix test = oracle::random_matrix(rng, 6, 2);
    const Matrix dv = ngrc::delay_vectors(test, 2);
    const Matrix kp = predict_kernel(km, dv);
    REQUIRE(kp.rows() == dv.rows());
    for (Index i = 0; i < dv.rows(); ++i) {
        const Vector np = ngrc::predict_ngrc(nm, row_of(dv, i));
        CHECK(kp(i, 0) == doctest::Approx(np(0)).epsilon(1e-8));
    }
}
