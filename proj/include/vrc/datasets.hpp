#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "vrc/ode.hpp"
#include "vrc/timeseries.hpp"

namespace vrc::datasets {

struct LorenzParams {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
};

TimeSeries simulate_lorenz(const Vector& initial, double dt, Index n_points, const LorenzParams& params = {},
                           const ode::Dopri5Options& options = {});

struct MackeyGlassParams {
    double beta = 0.2;
    double gamma = 0.1;
    double exponent = 10.0;
    double history = 1.2;
};

/// Integrates on the fine grid (n_fine points) and keeps every `splice`-th
/// sample, so the result has ceil(n_fine / splice) rows with dt = dt_fine*splice.
TimeSeries simulate_mackey_glass(double dt_fine, double delay, Index n_fine, Index splice,
                                 const MackeyGlassParams& params = {});

/// Diagonal BEKK(1,0,1): Sigma_t = C C^T + A r_{t-1} r_{t-1}^T A + B Sigma_{t-1} B.
struct BekkParams {
    Matrix C;  // upper triangular
    Vector a;  // diagonal of A
    Vector b;  // diagonal of B
    std::uint64_t seed = 0;

    Index dim() const { return a.size(); }
    void validate() const;
    /// Desk-scale defaults used by the presets.
    static BekkParams standard(Index d, std::uint64_t seed);
};

struct BekkSeries {
    TimeSeries inputs;   // innovations z_t
    TimeSeries returns;  // r_t
    TimeSeries outputs;  // vech(Sigma_t)
    bool used_fallback_start = false;
};

/// Unconditional covariance of the diagonal model. Returns false (and leaves
/// out untouched) when some a_i a_j + b_i b_j >= 1.
bool bekk_unconditional(const BekkParams& params, Matrix& out);

BekkSeries simulate_bekk(const BekkParams& params, Index n);

Vector vech(const Matrix& S);
Matrix inverse_vech(const Vector& v);
/// d such that d(d+1)/2 == q; throws if q is not triangular.
Index vech_dim(Index q);

TimeSeries load_csv(const std::filesystem::path& path);
/// `comments` are written as extra "# ..." lines after the dt line.
void save_csv(const TimeSeries& series, const std::filesystem::path& path, const std::vector<std::string>& comments = {});

std::pair<TimeSeries, TimeSeries> split_train_test(const TimeSeries& series, Index n_train);

}  // namespace vrc::datasets
