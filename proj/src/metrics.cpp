#include "vrc/metrics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>

#include "vrc/error.hpp"
#include "vrc/parallel.hpp"
#include "vrc/rng.hpp"

namespace vrc::metrics {

namespace {

void check_shapes(const Matrix& y, const Matrix& yhat) {
    if (y.rows() != yhat.rows() || y.cols() != yhat.cols()) throw InvalidInput("metric inputs differ in shape");
    if (y.rows() < 1) throw InvalidInput("metric inputs are empty");
}

}  // namespace

Nmse nmse(const Matrix& y, const Matrix& yhat) {
    check_shapes(y, yhat);
    Nmse out;
    double sum = 0;
    Index used = 0;
    for (Index u = 0; u < y.cols(); ++u) {
        const double mean = y.col(u).mean();
        const double tss = (y.col(u).array() - mean).square().sum();
        if (!(tss > 0.0)) {
            out.degenerate_dims.push_back(u);
            continue;
        }
        sum += (y.col(u) - yhat.col(u)).squaredNorm() / tss;
        ++used;
    }
    out.value = used ? sum / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
    return out;
}

double mae(const Matrix& y, const Matrix& yhat) {
    check_shapes(y, yhat);
    return (y - yhat).cwiseAbs().sum() / static_cast<double>(y.rows());
}

double mdae(const Matrix& y, const Matrix& yhat) {
    check_shapes(y, yhat);
    const Index h = y.rows();
    std::vector<double> col(static_cast<std::size_t>(h));
    double sum = 0;
    for (Index u = 0; u < y.cols(); ++u) {
        for (Index i = 0; i < h; ++i) col[i] = std::abs(y(i, u) - yhat(i, u));
        const auto mid = col.begin() + (h - 1) / 2;
        std::nth_element(col.begin(), mid, col.end());
        sum += *mid;
    }
    return sum / static_cast<double>(y.cols());
}

double mape(const Matrix& y, const Matrix& yhat, double eps) {
    check_shapes(y, yhat);
    if (!(eps > 0.0)) throw InvalidInput("MAPE epsilon must be positive");
    double sum = 0;
    for (Index u = 0; u < y.cols(); ++u)
        for (Index i = 0; i < y.rows(); ++i) sum += std::abs(y(i, u) - yhat(i, u)) / std::max(eps, std::abs(y(i, u)));
    return sum / static_cast<double>(y.size());
}

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Periodogram welch_psd(const Matrix& series, Index nperseg, double overlap, double dt) {
    const Index n = series.rows();
    if (nperseg < 2 || nperseg > n) throw InvalidInput("nperseg must lie in [2, series length]");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw InvalidInput("overlap must lie in [0, 1)");
    if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
    const Index noverlap = static_cast<Index>(std::floor(static_cast<double>(nperseg) * overlap));
    const Index step = nperseg - noverlap;
    const Index segments = (n - nperseg) / step + 1;
    const Index bins = nperseg / 2 + 1;
    const double fs = 1.0 / dt;

    std::vector<double> window(static_cast<std::size_t>(nperseg));
    double wss = 0;
    for (Index k = 0; k < nperseg; ++k) {
        window[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(nperseg));
        wss += window[k] * window[k];
    }
    const double scale = 1.0 / (fs * wss);

    Periodogram out;
    out.nperseg = nperseg;
    out.overlap = overlap;
    out.frequencies.resize(bins);
    for (Index k = 0; k < bins; ++k) out.frequencies(k) = static_cast<double>(k) * fs / static_cast<double>(nperseg);
    out.power = Matrix::Zero(bins, series.cols());

    double* in = fftw_alloc_real(static_cast<std::size_t>(nperseg));
    fftw_complex* spec = fftw_alloc_complex(static_cast<std::size_t>(bins));
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(nperseg), in, spec, FFTW_ESTIMATE);
    }
    parallel_for(
        static_cast<std::size_t>(series.cols()),
        [&](std::size_t begin, std::size_t end) {
            double* buf = fftw_alloc_real(static_cast<std::size_t>(nperseg));
            fftw_complex* out_c = fftw_alloc_complex(static_cast<std::size_t>(bins));
            for (std::size_t u = begin; u < end; ++u) {
                for (Index s = 0; s < segments; ++s) {
                    const Index start = s * step;
                    double mean = 0;
                    for (Index k = 0; k < nperseg; ++k) mean += series(start + k, u);
                    mean /= static_cast<double>(nperseg);
                    for (Index k = 0; k < nperseg; ++k) buf[k] = (series(start + k, u) - mean) * window[k];
                    fftw_execute_dft_r2c(plan, buf, out_c);
                    for (Index k = 0; k < bins; ++k) {
                        double p = (out_c[k][0] * out_c[k][0] + out_c[k][1] * out_c[k][1]) * scale;
                        const bool nyquist = nperseg % 2 == 0 && k == bins - 1;
                        if (k != 0 && !nyquist) p *= 2.0;
                        out.power(k, static_cast<Index>(u)) += p;
                    }
                }
            }
            fftw_free(buf);
            fftw_free(out_c);
        },
        1);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(spec);
    out.power /= static_cast<double>(segments);
    return out;
}

Psde psde(const Periodogram& truth, const Periodogram& estimate, double f_cut) {
    if (truth.power.rows() != estimate.power.rows() || truth.power.cols() != estimate.power.cols())
        throw InvalidInput("periodograms differ in shape");
    if (truth.frequencies.size() != estimate.frequencies.size() ||
        (truth.frequencies - estimate.frequencies).cwiseAbs().maxCoeff() >
            1e-12 * std::max(1.0, truth.frequencies.cwiseAbs().maxCoeff()))
        throw InvalidInput("periodograms use different frequency grids");
    Psde out;
    for (Index u = 0; u < truth.power.cols(); ++u)
        for (Index k = 1; k < truth.power.rows(); ++k) {
            if (truth.frequencies(k) > f_cut) break;
            const double p = truth.power(k, u);
            if (!(p > 0.0)) {
                ++out.skipped_zero_bins;
                continue;
            }
            out.value += std::abs(p - estimate.power(k, u)) / p;
            ++out.bins_used;
        }
    return out;
}

double w1_1d(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InvalidInput("Wasserstein distance needs non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    // Integrate |F_a - F_b| over the merged breakpoints.
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double prev = std::min(a[0], b[0]), total = 0;
    while (i < a.size() || j < b.size()) {
        const double x = j >= b.size() || (i < a.size() && a[i] <= b[j]) ? a[i] : b[j];
        total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (x - prev);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        prev = x;
    }
    return total;
}

std::vector<Index> solve_assignment(const Matrix& cost) {
    const Index n = cost.rows();
    if (cost.cols() != n) throw InvalidInput("assignment needs a square cost matrix");
    // Shortest augmenting paths with potentials, 1-based with a virtual column 0.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<Index> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (Index i = 1; i <= n; ++i) {
        match[0] = i;
        Index j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const Index i0 = match[j0];
            double delta = inf;
            Index j1 = 0;
            for (Index j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (Index j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const Index j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<Index> row_to_col(static_cast<std::size_t>(n));
    for (Index j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

double w1_nd(const Matrix& a, const Matrix& b, Index cap) {
    if (a.rows() != b.rows()) throw InvalidInput("w1_nd needs equal sample counts; subsample first");
    if (a.cols() != b.cols()) throw InvalidInput("w1_nd samples differ in dimension");
    const Index k = a.rows();
    if (k < 1) throw InvalidInput("w1_nd needs non-empty samples");
    if (k > cap) throw InvalidInput("w1_nd sample count " + std::to_string(k) + " exceeds the cap " + std::to_string(cap));
    Matrix cost(k, k);
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < k; ++j) cost(i, j) = (a.row(i) - b.row(j)).norm();
    const auto match = solve_assignment(cost);
    double total = 0;
    for (Index i = 0; i < k; ++i) total += cost(i, match[i]);
    return total / static_cast<double>(k);
}

Matrix subsample_rows(const Matrix& x, Index k, std::uint64_t seed) {
    const Index n = x.rows();
    if (k >= n) return x;
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    PhiloxRng rng(seed);
    // Partial Fisher-Yates shuffle.
    for (Index i = 0; i < k; ++i) {
        const Index span = n - i;
        const Index j = i + static_cast<Index>(rng.uniform() * static_cast<double>(span));
        std::swap(idx[i], idx[std::min(j, n - 1)]);
    }
    std::sort(idx.begin(), idx.begin() + k);
    Matrix out(k, x.cols());
    for (Index i = 0; i < k; ++i) out.row(i) = x.row(idx[i]);
    return out;
}

}  // namespace vrc::metrics
