#pragma once

#include <string>

#include "vrc/types.hpp"

// Dense symmetric solves behind the primal and dual ridge closed forms, plus
// the symmetric PSD square root used by the BEKK simulator.
//
// Loss convention: sum of squares, ||Xw - Y||^2 + lambda ||w||^2. A 1/n factor
// in the empirical risk is absorbed into lambda.
namespace vrc::linsolve {

enum class PrimalMethod {
    svd,               // w = V diag(s / (s^2 + lambda)) U^T Y; never squares cond(X)
    normal_equations,  // Cholesky of X^T X + lambda I with diagonal jitter escalation
};

enum class GramMethod {
    automatic,      // eigen for n <= kEigenRouteMaxSize, factorization otherwise
    eigen,          // pseudo-inverse reading of (K^2 + lambda K)^-1 K Y
    factorization,  // Cholesky of K + lambda I with diagonal jitter escalation
};

inline constexpr Index kEigenRouteMaxSize = 1024;
inline constexpr int kMaxJitterRetries = 4;

struct RidgeSolution {
    Matrix coefficients;    // N x m (primal) or n x m (dual)
    double regularizer = 0;
    double smallest_pivot = 0;  // smallest eigenvalue / pivot of the solved system
    Index rank = 0;             // numerical rank of X or K
    int jitter_retries = 0;
    std::string route;
};

RidgeSolution solve_ridge_primal(const Matrix& X, const Matrix& Y, double lambda,
                                 PrimalMethod method = PrimalMethod::svd);

/// Dual coefficients alpha with predictions K alpha. Requires K symmetric to
/// 1e-8 * max|K|. For nonsingular K this solves (K + lambda I) alpha = Y; for
/// singular K it returns the minimum-norm solution of (K^2 + lambda K) alpha = K Y.
RidgeSolution solve_ridge_gram(const Matrix& K, const Matrix& Y, double lambda,
                               GramMethod method = GramMethod::automatic);

/// Symmetric root R = Q sqrt(max(D, 0)) Q^T of a symmetric PSD matrix.
Matrix psd_sqrt(const Matrix& S);

double max_abs(const Matrix& A);

}  // namespace vrc::linsolve
