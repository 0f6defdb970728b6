#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "vrc/datasets.hpp"
#include "vrc/error.hpp"
#include "vrc/linsolve.hpp"
#include "vrc/ode.hpp"
#include "vrc/rng.hpp"

using namespace vrc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "vrc_test_datasets";
    fs::create_directories(dir);
    return dir / name;
}

// Classical RK4 with a small fixed step.
Vector lorenz_rk4(Vector y, double t_end, double h) {
    auto f = [](const Vector& s) {
        Vector d(3);
        d << 10.0 * (s(1) - s(0)), s(0) * (28.0 - s(2)) - s(1), s(0) * s(1) - (8.0 / 3.0) * s(2);
        return d;
    };
    const long steps = std::lround(t_end / h);
    for (long k = 0; k < steps; ++k) {
        const Vector k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return y;
}

}  // namespace

TEST_CASE("Philox known-answer vectors") {
    using B = PhiloxRng::Block;
    CHECK(PhiloxRng::generate(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(PhiloxRng::generate(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(PhiloxRng::generate(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("Philox streams are reproducible and roughly normal") {
    PhiloxRng a(7), b(7), c(8);
    for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
    CHECK(PhiloxRng(7).next_u64() != c.next_u64());
    PhiloxRng g(3);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = g.normal();
        s += x;
        s2 += x * x;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.02);
    PhiloxRng u(4);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform();
        CHECK((x >= 0.0 && x < 1.0));
    }
}

TEST_CASE("adaptive integrator on exponential decay") {
    const auto y = ode::integrate_dopri5([](double, std::span<const double> s, std::span<double> d) { d[0] = -s[0]; },
                                         Vector::Ones(1), 0.0, 0.25, 5);
    REQUIRE(y.rows() == 5);
    for (Index k = 0; k < 5; ++k) CHECK(std::abs(y(k, 0) - std::exp(-0.25 * double(k))) < 1e-8);
}

TEST_CASE("Lorenz agrees with a fine-step RK4 oracle over a short window") {
    Vector y0(3);
    y0 << 0.0, 1.0, 1.05;
    const auto s = datasets::simulate_lorenz(y0, 0.005, 201);
    CHECK(s.dt == 0.005);
    CHECK(s.values.row(0) == y0.transpose());
    const Vector ref = lorenz_rk4(y0, 1.0, 1e-4);
    CHECK((s.values.row(200).transpose() - ref).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("delay integrator without delay feedback") {
    const Vector z = ode::integrate_delay_fixed([](double, double x, double) { return -0.1 * x; }, 1.2, 0.1, 17.0, 171);
    for (Index k = 0; k < 171; k += 10) CHECK(std::abs(z(k) - 1.2 * std::exp(-0.1 * 0.1 * double(k))) < 1e-10);
}

TEST_CASE("Mackey-Glass before the delay reaches the start") {
    // For t < delay the delayed term is the constant history, so the equation is
    // linear with a closed-form solution.
    const double h = 1.2, c = 0.2 * h / (1.0 + std::pow(h, 10));
    CHECK(c - 0.1 * h == doctest::Approx(-0.0866284).epsilon(1e-6));
    const auto s = datasets::simulate_mackey_glass(0.02, 17.0, 851, 50);
    CHECK(s.dt == doctest::Approx(1.0));
    REQUIRE(s.length() == 18);
    for (Index k = 0; k < 18; ++k) {
        const double t = double(k);
        CHECK(std::abs(s.values(k, 0) - (c / 0.1 + (h - c / 0.1) * std::exp(-0.1 * t))) < 1e-10);
    }
    const auto longer = datasets::simulate_mackey_glass(0.02, 17.0, 20000, 50);
    CHECK(longer.length() == 400);
    CHECK(longer.values.allFinite());
    CHECK(longer.values.minCoeff() > 0.0);
}

TEST_CASE("vech round trip and triangular dimensions") {
    Matrix S(3, 3);
    S << 1, 2, 3, 2, 4, 5, 3, 5, 6;
    const Vector v = datasets::vech(S);
    Vector expected(6);
    expected << 1, 2, 3, 4, 5, 6;
    CHECK(v == expected);
    CHECK(datasets::inverse_vech(v) == S);
    CHECK(datasets::vech_dim(15) == 5);
    CHECK_THROWS_AS(datasets::vech_dim(7), InvalidInput);
}

TEST_CASE("BEKK series follows its recursion") {
    const auto params = datasets::BekkParams::standard(3, 5);
    const auto series = datasets::simulate_bekk(params, 200);
    const Matrix cc = params.C * params.C.transpose();
    const Matrix A = params.a.asDiagonal(), B = params.b.asDiagonal();
    Matrix bar;
    REQUIRE(datasets::bekk_unconditional(params, bar));
    CHECK(!series.used_fallback_start);
    // Stationary mean solves bar = CC' + A bar A + B bar B.
    CHECK((bar - (cc + A * bar * A + B * bar * B)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((datasets::inverse_vech(series.outputs.values.row(0).transpose()) - bar).cwiseAbs().maxCoeff() < 1e-15);
    for (Index t = 1; t < 200; ++t) {
        const Vector r = series.returns.values.row(t - 1).transpose();
        const Matrix prev = datasets::inverse_vech(series.outputs.values.row(t - 1).transpose());
        const Matrix want = cc + A * r * r.transpose() * A + B * prev * B;
        const Matrix got = datasets::inverse_vech(series.outputs.values.row(t).transpose());
        CHECK((got - want).cwiseAbs().maxCoeff() < 1e-14);
        const Vector rt = linsolve::psd_sqrt(got) * series.inputs.values.row(t).transpose();
        CHECK((rt - series.returns.values.row(t).transpose()).cwiseAbs().maxCoeff() < 1e-14);
    }
    const auto again = datasets::simulate_bekk(params, 200);
    CHECK(again.outputs.values == series.outputs.values);
}

TEST_CASE("BEKK parameter validation") {
    auto p = datasets::BekkParams::standard(2, 0);
    p.b(0) = 1.0;
    CHECK_THROWS_AS(p.validate(), InvalidInput);
    p = datasets::BekkParams::standard(2, 0);
    p.C(1, 0) = 0.1;
    CHECK_THROWS_AS(p.validate(), InvalidInput);
}

TEST_CASE("CSV round trip is exact") {
    std::mt19937_64 rng(51);
    TimeSeries s;
    s.values = oracle::random_matrix(rng, 20, 3, -1e6, 1e6);
    s.values(3, 1) = 1e-300;
    s.dt = 0.1;
    s.origin = "unit";
    const auto path = scratch("round.csv");
    datasets::save_csv(s, path, {"note=1"});
    const auto back = datasets::load_csv(path);
    CHECK(back.values == s.values);
    CHECK(back.dt == s.dt);
    CHECK(back.origin == "unit");
}

TEST_CASE("CSV parse errors carry a location") {
    const auto path = scratch("bad.csv");
    {
        std::ofstream f(path);
        f << "# dt=1\nt,c0\n0,1.0\n1,abc\n";
    }
    try {
        datasets::load_csv(path);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("4") != std::string::npos);
    }
    CHECK_THROWS(datasets::load_csv(scratch("missing.csv")));
}

TEST_CASE("train/test split") {
    TimeSeries s;
    s.values = Matrix::Zero(10, 2);
    for (Index i = 0; i < 10; ++i) s.values(i, 0) = double(i);
    const auto [train, test] = datasets::split_train_test(s, 7);
    CHECK(train.length() == 7);
    CHECK(test.length() == 3);
    CHECK(test.values(0, 0) == 7.0);
    CHECK_THROWS_AS(datasets::split_train_test(s, 10), InvalidInput);
}
