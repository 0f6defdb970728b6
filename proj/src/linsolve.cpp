#include "vrc/linsolve.hpp"

#include <cmath>
#include <limits>

#include "vrc/error.hpp"

namespace vrc::linsolve {
namespace {

using ColMatrix = Eigen::MatrixXd;

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_finite(const Matrix& A, const char* what) {
    if (!A.allFinite()) throw InvalidInput(std::string(what) + " contains non-finite entries");
}

void require_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw InvalidInput("ridge regularizer must be positive and finite");
}

// Cholesky of A + (lambda + jitter) I, escalating the jitter on failure.
template <class Solve>
RidgeSolution factor_with_jitter(const ColMatrix& A, double lambda, Solve&& solve) {
    const Index n = A.rows();
    const double scale = std::max(A.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    double jitter = 0.0;
    for (int attempt = 0; attempt <= kMaxJitterRetries; ++attempt) {
        ColMatrix shifted = A;
        shifted.diagonal().array() += lambda + jitter;
        Eigen::LLT<ColMatrix> llt(shifted);
        if (llt.info() == Eigen::Success) {
            const auto& L = llt.matrixLLT();
            double pivot = std::numeric_limits<double>::infinity();
            for (Index i = 0; i < n; ++i) pivot = std::min(pivot, L(i, i) * L(i, i));
            RidgeSolution out;
            out.coefficients = solve(llt);
            if (!out.coefficients.allFinite()) break;
            out.regularizer = lambda;
            out.smallest_pivot = pivot;
            out.rank = n;
            out.jitter_retries = attempt;
            out.route = "cholesky";
            return out;
        }
        jitter = attempt == 0 ? 1e-12 * scale : jitter * 10.0;
    }
    throw ConditioningError("Cholesky factorization failed after " + std::to_string(kMaxJitterRetries) +
                            " jitter retries (n=" + std::to_string(n) + ")");
}

RidgeSolution gram_eigen(const Matrix& K, const Matrix& Y, double lambda) {
    const Index n = K.rows();
    Eigen::SelfAdjointEigenSolver<ColMatrix> es(ColMatrix(K), Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw ConditioningError("eigendecomposition of the Gram matrix failed");
    const Eigen::VectorXd& mu = es.eigenvalues();
    const double mu_max = std::max(std::abs(mu.minCoeff()), std::abs(mu.maxCoeff()));
    const double tol = static_cast<double>(n) * kEps * mu_max;
    const ColMatrix& Q = es.eigenvectors();
    ColMatrix proj = Q.transpose() * Y;
    Index rank = 0;
    double smallest = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < n; ++k) {
        if (mu(k) > tol) {
            proj.row(k) /= mu(k) + lambda;
            ++rank;
            smallest = std::min(smallest, mu(k) + lambda);
        } else {
            proj.row(k).setZero();
        }
    }
    RidgeSolution out;
    out.coefficients = Q * proj;
    out.regularizer = lambda;
    out.smallest_pivot = rank > 0 ? smallest : lambda;
    out.rank = rank;
    out.route = rank == n ? "eigen" : "eigen-pinv";
    return out;
}

}  // namespace

double max_abs(const Matrix& A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff(); }

RidgeSolution solve_ridge_primal(const Matrix& X, const Matrix& Y, double lambda, PrimalMethod method) {
    require_lambda(lambda);
    if (X.rows() < 1 || X.cols() < 1) throw InvalidInput("design matrix must be non-empty");
    if (Y.rows() != X.rows()) throw InvalidInput("design matrix and targets disagree on row count");
    require_finite(X, "design matrix");
    require_finite(Y, "targets");

    if (method == PrimalMethod::normal_equations) {
        const ColMatrix Xc = X;
        ColMatrix gram = ColMatrix::Zero(X.cols(), X.cols());
        gram.selfadjointView<Eigen::Lower>().rankUpdate(Xc.transpose());
        gram = gram.selfadjointView<Eigen::Lower>();
        const ColMatrix rhs = Xc.transpose() * Y;
        auto out = factor_with_jitter(gram, lambda, [&](const Eigen::LLT<ColMatrix>& llt) {
            return Matrix(llt.solve(rhs));
        });
        out.route = "normal-equations";
        return out;
    }

    Eigen::BDCSVD<ColMatrix> svd(ColMatrix(X), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double tol = static_cast<double>(std::max(X.rows(), X.cols())) * kEps * (s.size() ? s(0) : 0.0);
    ColMatrix proj = svd.matrixU().transpose() * Y;
    Index rank = 0;
    for (Index k = 0; k < s.size(); ++k) {
        if (s(k) > tol) {
            ++rank;
            proj.row(k) *= s(k) / (s(k) * s(k) + lambda);
        } else {
            proj.row(k).setZero();
        }
    }
    RidgeSolution out;
    out.coefficients = svd.matrixV() * proj;
    out.regularizer = lambda;
    const double smin = s.size() == X.cols() ? s(s.size() - 1) : 0.0;
    out.smallest_pivot = smin * smin + lambda;
    out.rank = rank;
    out.route = "svd";
    return out;
}

RidgeSolution solve_ridge_gram(const Matrix& K, const Matrix& Y, double lambda, GramMethod method) {
    require_lambda(lambda);
    if (K.rows() != K.cols() || K.rows() < 1) throw InvalidInput("Gram matrix must be square and non-empty");
    if (Y.rows() != K.rows()) throw InvalidInput("Gram matrix and targets disagree on row count");
    require_finite(K, "Gram matrix");
    require_finite(Y, "targets");
    const double scale = max_abs(K);
    if (max_abs(K - K.transpose()) > 1e-8 * scale) throw InvalidInput("Gram matrix is not symmetric");

    if (method == GramMethod::automatic)
        method = K.rows() <= kEigenRouteMaxSize ? GramMethod::eigen : GramMethod::factorization;
    if (method == GramMethod::eigen) return gram_eigen(K, Y, lambda);

    const ColMatrix Kc = K;
    const ColMatrix Yc = Y;
    return factor_with_jitter(Kc, lambda, [&](const Eigen::LLT<ColMatrix>& llt) { return Matrix(llt.solve(Yc)); });
}

Matrix psd_sqrt(const Matrix& S) {
    if (S.rows() != S.cols()) throw InvalidInput("psd_sqrt needs a square matrix");
    require_finite(S, "psd_sqrt input");
    const double scale = max_abs(S);
    if (max_abs(S - S.transpose()) > 1e-10 * std::max(scale, 1.0)) throw InvalidInput("psd_sqrt input is not symmetric");
    Eigen::SelfAdjointEigenSolver<ColMatrix> es{ColMatrix(S)};
    if (es.info() != Eigen::Success) throw ConditioningError("eigendecomposition failed in psd_sqrt");
    Eigen::VectorXd mu = es.eigenvalues();
    const double norm = mu.cwiseAbs().maxCoeff();
    if (mu.minCoeff() < -1e-10 * norm) throw InvalidInput("psd_sqrt input is indefinite");
    mu = mu.cwiseMax(0.0).cwiseSqrt();
    const ColMatrix& Q = es.eigenvectors();
    ColMatrix R = Q * mu.asDiagonal() * Q.transpose();
    return Matrix(0.5 * (R + R.transpose()));
}

}  // namespace vrc::linsolve
