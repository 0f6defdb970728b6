#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "vrc/types.hpp"

namespace oracle {

using vrc::Index;
using vrc::Matrix;
using vrc::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

/// Ridge weights from the normal equations solved by partial-pivot LU.
inline Matrix ridge_lu(const Matrix& X, const Matrix& Y, double lambda) {
    const Eigen::MatrixXd A = X.transpose() * X + lambda * Eigen::MatrixXd::Identity(X.cols(), X.cols());
    const Eigen::MatrixXd B = X.transpose() * Y;
    return A.partialPivLu().solve(B);
}

inline double rel_err(const Matrix& a, const Matrix& b) {
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// All multi-indices over `vars` variables with total degree <= p, by nested enumeration.
inline std::vector<std::vector<int>> enumerate_multi_indices(int vars, int p) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(vars, 0);
    auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == vars) {
            out.push_back(cur);
            return;
        }
        for (int e = 0; e <= left; ++e) {
            cur[pos] = e;
            self(self, pos + 1, left - e);
        }
        cur[pos] = 0;
    };
    rec(rec, 0, p);
    return out;
}

inline double monomial(const std::vector<double>& v, const std::vector<int>& e) {
    double r = 1.0;
    for (std::size_t k = 0; k < v.size(); ++k)
        for (int t = 0; t < e[k]; ++t) r *= v[k];
    return r;
}

/// Multinomial coefficient p! / ((p - |e|)! prod e_k!).
inline double multinomial(int p, const std::vector<int>& e) {
    double r = std::tgamma(p + 1.0);
    int deg = 0;
    for (int x : e) {
        r /= std::tgamma(x + 1.0);
        deg += x;
    }
    return r / std::tgamma(p - deg + 1.0);
}

/// Naive O(n^2) DFT power at bin k.
inline double dft_power(const std::vector<double>& x, Index k) {
    const double n = static_cast<double>(x.size());
    double re = 0, im = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double a = -2.0 * M_PI * static_cast<double>(k) * static_cast<double>(t) / n;
        re += x[t] * std::cos(a);
        im += x[t] * std::sin(a);
    }
    return re * re + im * im;
}

/// Exact equal-weight transport cost by trying every permutation.
inline double w1_bruteforce(const Matrix& a, const Matrix& b) {
    std::vector<Index> perm(static_cast<std::size_t>(a.rows()));
    for (Index i = 0; i < a.rows(); ++i) perm[i] = i;
    double best = INFINITY;
    do {
        double c = 0;
        for (Index i = 0; i < a.rows(); ++i) c += (a.row(i) - b.row(perm[i])).norm();
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(a.rows());
}

}  // namespace oracle
