#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "vrc/types.hpp"

namespace vrc::metrics {

/// Pointwise errors between reference y and prediction yhat (h x d).
struct Nmse {
    double value = 0;
    std::vector<Index> degenerate_dims;  // zero reference variance; left out of the average
};
Nmse nmse(const Matrix& y, const Matrix& yhat);
double mae(const Matrix& y, const Matrix& yhat);
/// Lower median per dimension, averaged over dimensions.
double mdae(const Matrix& y, const Matrix& yhat);
/// Denominator max(eps, |y_{u,i}|) per entry.
double mape(const Matrix& y, const Matrix& yhat, double eps = 1e-8);

struct Periodogram {
    Vector frequencies;  // uniform, one-sided
    Matrix power;        // bins x d
    Index nperseg = 0;
    double overlap = 0.5;
};

/// Welch estimate: periodic Hann window, mean-detrended segments, density
/// scaling, one-sided. fs = 1/dt.
Periodogram welch_psd(const Matrix& series, Index nperseg, double overlap = 0.5, double dt = 1.0);

struct Psde {
    double value = 0;
    Index bins_used = 0;
    Index skipped_zero_bins = 0;  // bins with zero true power
};
/// Sum over dimensions and bins 0 < f <= f_cut of |P - Phat| / P. The DC bin is
/// excluded since detrended segments carry no power there.
Psde psde(const Periodogram& truth, const Periodogram& estimate,
          double f_cut = std::numeric_limits<double>::infinity());

double w1_1d(std::vector<double> a, std::vector<double> b);

inline constexpr Index kDefaultW1Cap = 512;

/// Exact optimal transport between equal-size uniform point clouds (rows),
/// solved as a minimum-cost assignment on Euclidean distances.
double w1_nd(const Matrix& a, const Matrix& b, Index cap = kDefaultW1Cap);

/// Draws k rows without replacement using a seeded Philox stream; returns all
/// rows in order when k >= rows.
Matrix subsample_rows(const Matrix& x, Index k, std::uint64_t seed);

/// Minimum-cost perfect matching on a square cost matrix; returns the
/// assignment row -> column.
std::vector<Index> solve_assignment(const Matrix& cost);

}  // namespace vrc::metrics
