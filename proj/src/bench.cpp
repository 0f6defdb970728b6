#include "vrc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "vrc/error.hpp"
#include "vrc/kernels.hpp"
#include "vrc/ngrc.hpp"
#include "vrc/rng.hpp"

namespace vrc::bench {

namespace {

Matrix uniform_series(Index n, int d, std::uint64_t seed) {
    PhiloxRng rng(seed);
    Matrix x(n, d);
    for (Index i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = 2.0 * rng.uniform() - 1.0;
    return x;
}

// Rows with Euclidean norm below 1, as the Volterra kernel requires.
Matrix bounded_series(Index n, int d, std::uint64_t seed) {
    Matrix x = uniform_series(n, d, seed);
    return x / (std::sqrt(static_cast<double>(d)) * (1.0 + 1e-9));
}

}  // namespace

BenchConfig parse_bench(const serialize::Json& doc) {
    BenchConfig b;
    if (!doc.contains("bench")) {
        b.seed = doc.value("seed", std::uint64_t{0});
        return b;
    }
    const auto& j = doc.at("bench");
    try {
        if (j.contains("n")) b.ns = j.at("n").get<std::vector<Index>>();
        if (j.contains("p")) b.ps = j.at("p").get<std::vector<int>>();
        b.tau = j.value("tau", b.tau);
        b.d = j.value("d", b.d);
        b.repeats = j.value("repeats", b.repeats);
        b.prediction_steps = j.value("prediction_steps", b.prediction_steps);
    } catch (const serialize::Json::exception& e) {
        throw ConfigError(std::string("bench: ") + e.what());
    }
    b.seed = doc.value("seed", std::uint64_t{0});
    if (b.ns.empty() || b.ps.empty()) throw ConfigError("bench: n and p lists must be non-empty");
    for (Index n : b.ns)
        if (n < 1) throw ConfigError("bench.n: values must be positive");
    for (int p : b.ps)
        if (p < 1) throw ConfigError("bench.p: values must be positive");
    if (b.tau < 1 || b.d < 1) throw ConfigError("bench: tau and d must be positive");
    if (b.repeats < 1) throw ConfigError("bench.repeats must be positive");
    return b;
}

double time_median(const std::function<void()>& body, int repeats) {
    body();  // warm-up
    std::vector<double> t;
    for (int r = 0; r < repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        body();
        t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
}

double time_ngrc_training(Index n, int tau, int d, int p, int repeats, std::uint64_t seed) {
    // n training samples need tau - 1 extra leading rows for the first delay vector.
    const Index len = n + tau - 1;
    const Matrix x = uniform_series(len + 1, d, seed);
    const Matrix in = x.topRows(len), out = x.bottomRows(len);
    return time_median(
        [&] {
            // Normal equations: the feature-space cost the asymptotic count refers to.
            const auto m = ngrc::fit_ngrc(in, out, tau, p, 1e-6, linsolve::PrimalMethod::normal_equations);
            if (m.weights.rows() == 0) throw Error("empty fit");
        },
        repeats);
}

double time_poly_gram(Index n, int tau, int d, int p, int repeats, std::uint64_t seed) {
    const Matrix rows = ngrc::delay_vectors(uniform_series(n + tau - 1, d, seed), tau);
    return time_median([&] { (void)kernels::poly_gram(rows, kernels::PolyKernelParams{p, 1.0, tau}); }, repeats);
}

double time_volterra_gram(Index n, int d, int repeats, std::uint64_t seed) {
    const Matrix z = bounded_series(n, d, seed);
    kernels::VolterraParams params;
    params.lambda = 0.5;
    params.theta = 0.5;
    return time_median([&] { (void)kernels::volterra_gram(z, params); }, repeats);
}

std::vector<BenchRow> run_bench(const BenchConfig& c) {
    std::vector<BenchRow> rows;
    const int w = c.tau * c.d;
    for (Index n : c.ns) {
        for (int p : c.ps) {
            const std::string N = "C(" + std::to_string(w) + "+" + std::to_string(p) + "," + std::to_string(p) + ")";
            rows.push_back({"ngrc_train", n, c.tau, c.d, p, time_ngrc_training(n, c.tau, c.d, p, c.repeats, c.seed),
                            "O(n N^2 + N^3), N=" + N});
            rows.push_back({"poly_gram", n, c.tau, c.d, p, time_poly_gram(n, c.tau, c.d, p, c.repeats, c.seed),
                            "O(n^2 tau d)"});
            rows.push_back({"volterra_gram", n, 0, c.d, p, time_volterra_gram(n, c.d, c.repeats, c.seed),
                            "O(n^2 d)"});
        }
        // Per-step prediction cost at the largest p.
        const int p = c.ps.back();
        const Index len = n + c.tau - 1;
        const Matrix x = uniform_series(len + 1, c.d, c.seed);
        const auto model = ngrc::fit_ngrc(x.topRows(len), x.bottomRows(len), c.tau, p, 1e-6);
        const Vector v = Vector::Constant(w, 0.1);
        const double t_ngrc = time_median(
            [&] {
                for (int s = 0; s < c.prediction_steps; ++s)
                    (void)ngrc::predict_ngrc(model, {v.data(), static_cast<std::size_t>(w)});
            },
            c.repeats);
        rows.push_back({"ngrc_step", n, c.tau, c.d, p, t_ngrc / c.prediction_steps, "O(N d)"});
        const Matrix z = bounded_series(n, c.d, c.seed);
        const Matrix z_by_dim = z.transpose();
        kernels::VolterraParams params;
        params.lambda = 0.5;
        params.theta = 0.5;
        const Vector start = Vector::Ones(n);
        const Vector znew = z.row(0).transpose();
        Vector col = start, next;
        const double t_volt = time_median(
            [&] {
                for (int s = 0; s < c.prediction_steps; ++s) {
                    kernels::volterra_next_column(z_by_dim, {znew.data(), static_cast<std::size_t>(c.d)}, col, params,
                                                  next);
                    col.swap(next);
                }
            },
            c.repeats);
        rows.push_back({"volterra_step", n, 0, c.d, 0, t_volt / c.prediction_steps, "O(n d)"});
    }
    return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << "task,n,tau,d,p,median_seconds,complexity\n";
    char buf[32];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.6e", r.median_seconds);
        f << r.task << ',' << r.n << ',' << r.tau << ',' << r.d << ',' << r.p << ',' << buf << ",\"" << r.complexity
          << "\"\n";
    }
}

}  // namespace vrc::bench
