#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vrc/estimator.hpp"

namespace vrc::cv {

struct Fold {
    Index train_begin = 0, train_end = 0;  // [begin, end)
    Index val_begin = 0, val_end = 0;
};

enum class FoldMode { overlapping, expanding };

struct FoldPlan {
    FoldMode mode = FoldMode::overlapping;
    std::vector<Fold> folds;
};

/// Train [s, s+fold_len), validate [s+fold_len, s+fold_len+val_len) for s = 0, stride, ...
FoldPlan overlapping_folds(Index n_train, Index fold_len, Index val_len, Index stride);
/// k equal blocks (remainder in the last); fold i trains on blocks 1..i and validates on block i+1.
FoldPlan expanding_folds(Index n_train, Index k);

enum class TaskMode { path_continuation, open_loop };

/// Candidate values; the cartesian product is searched. Lagged families use
/// taus x ps x lambda_regs, Volterra uses lambdas x thetas x lambda_regs.
struct Grid {
    estimator::EstimatorSpec base;  // family, washout, scaling and fixed settings
    std::vector<int> taus;
    std::vector<int> ps;
    std::vector<double> lambdas;
    std::vector<double> thetas;
    std::vector<double> lambda_regs;
};

struct CandidateResult {
    estimator::EstimatorSpec spec;
    double mse = 0;  // mean over folds; +inf if any fold diverged
    std::vector<double> fold_mse;
    std::string error;  // set when the candidate could not be fitted at all
};

struct GridResult {
    estimator::EstimatorSpec best;
    Index best_index = -1;
    std::vector<CandidateResult> table;
    std::vector<std::pair<double, double>> pruned;  // infeasible (lambda, theta)
};

/// Expands a grid into candidate specs, dropping infeasible Volterra pairs.
std::vector<estimator::EstimatorSpec> expand(const Grid& grid, std::vector<std::pair<double, double>>* pruned = nullptr);

/// For path continuation, outputs are ignored and the model maps series[t] to
/// series[t+1]; validation rolls out from the last training point.
GridResult grid_search(const Grid& grid, const FoldPlan& plan, TaskMode mode, const Matrix& inputs,
                       const Matrix& outputs);

/// true if a should be preferred over b under the tie-break (smaller p,
/// smaller tau, larger lambda_reg).
bool simpler(const estimator::EstimatorSpec& a, const estimator::EstimatorSpec& b);

}  // namespace vrc::cv
