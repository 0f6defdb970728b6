#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vrc/linsolve.hpp"
#include "vrc/types.hpp"

namespace vrc::ngrc {

struct DelaySpec {
    int tau = 1;  // number of lags, including the present sample
    int d = 1;    // input dimension
    int width() const { return tau * d; }
    void validate() const;
};

inline constexpr std::uint64_t kMaxFeatureRows = std::uint64_t{1} << 24;

/// N = binomial(tau*d + p, p). Throws CapacityError on 64-bit overflow.
std::uint64_t feature_dim(int tau, int d, int p);

/// Monomial multi-indices of degree <= p over tau*d variables in graded
/// lexicographic order: constant first, then by degree, and within a degree
/// by descending exponent of the earliest variable.
class ExponentTable {
  public:
    ExponentTable() = default;
    static ExponentTable build(int tau, int d, int p);

    int tau() const { return tau_; }
    int d() const { return d_; }
    int p() const { return p_; }
    int width() const { return tau_ * d_; }
    Index size() const { return static_cast<Index>(degree_.size()); }

    std::span<const std::uint16_t> row(Index k) const {
        return {exponents_.data() + k * width(), static_cast<std::size_t>(width())};
    }
    int degree(Index k) const { return degree_[k]; }
    // Row k (k >= 1) equals row parent(k) with exponent of variable(k) raised by one.
    Index parent(Index k) const { return parent_[k]; }
    int variable(Index k) const { return variable_[k]; }

  private:
    int tau_ = 0, d_ = 0, p_ = 0;
    std::vector<std::uint16_t> exponents_;
    std::vector<int> degree_;
    std::vector<Index> parent_;
    std::vector<int> variable_;
};

inline ExponentTable build_exponent_table(int tau, int d, int p) { return ExponentTable::build(tau, d, p); }

/// Rows t = tau..n (1-based) of the tau-delay embedding; each row concatenates
/// z_{t-tau+1}, ..., z_t, oldest lag first. Output is (n - tau + 1) x (tau*d).
Matrix delay_vectors(const Matrix& series, int tau);

/// Phi(v): entry k is prod_s v_s^{row(k)_s}; entry 0 is 1.
Vector ngrc_features(std::span<const double> v, const ExponentTable& table);

/// Feature matrix, one row of ngrc_features per row of delay_rows.
Matrix feature_matrix(const Matrix& delay_rows, const ExponentTable& table);

struct NgrcModel {
    DelaySpec delay;
    ExponentTable exponents;
    Matrix weights;  // N x m
    double lambda_reg = 0;
    linsolve::RidgeSolution diagnostics;
};

/// Ridge fit of targets rows t = tau..n on features of the tau-delay vectors
/// ending at t. inputs is n x d, targets n x m (row t pairs with input row t).
NgrcModel fit_ngrc(const Matrix& inputs, const Matrix& targets, int tau, int p, double lambda_reg,
                   linsolve::PrimalMethod method = linsolve::PrimalMethod::svd);

/// w*^T Phi(v) for one tau*d delay vector.
Vector predict_ngrc(const NgrcModel& model, std::span<const double> v);

}  // namespace vrc::ngrc
