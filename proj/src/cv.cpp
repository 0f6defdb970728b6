#include "vrc/cv.hpp"

#include <cmath>
#include <limits>

#include "vrc/error.hpp"
#include "vrc/forecast.hpp"
#include "vrc/parallel.hpp"

namespace vrc::cv {

FoldPlan overlapping_folds(Index n_train, Index fold_len, Index val_len, Index stride) {
    if (fold_len < 1 || val_len < 1 || stride < 1) throw InvalidInput("fold lengths and stride must be positive");
    if (fold_len + val_len > n_train) throw InvalidInput("fold and validation lengths exceed the training size");
    FoldPlan plan;
    plan.mode = FoldMode::overlapping;
    for (Index s = 0; s + fold_len + val_len <= n_train; s += stride)
        plan.folds.push_back({s, s + fold_len, s + fold_len, s + fold_len + val_len});
    return plan;
}

FoldPlan expanding_folds(Index n_train, Index k) {
    if (k < 2) throw InvalidInput("expanding folds need k >= 2");
    if (n_train < k) throw InvalidInput("expanding folds need n_train >= k");
    const Index block = n_train / k;
    FoldPlan plan;
    plan.mode = FoldMode::expanding;
    for (Index i = 1; i < k; ++i) {
        const Index val_end = i + 1 == k ? n_train : (i + 1) * block;
        plan.folds.push_back({0, i * block, i * block, val_end});
    }
    return plan;
}

std::vector<estimator::EstimatorSpec> expand(const Grid& grid, std::vector<std::pair<double, double>>* pruned) {
    std::vector<estimator::EstimatorSpec> out;
    const auto& regs = grid.lambda_regs.empty() ? std::vector<double>{grid.base.lambda_reg} : grid.lambda_regs;
    if (grid.base.family == estimator::EstimatorFamily::volterra) {
        const auto& lambdas = grid.lambdas.empty() ? std::vector<double>{grid.base.lambda} : grid.lambdas;
        const auto& thetas = grid.thetas.empty() ? std::vector<double>{grid.base.theta} : grid.thetas;
        for (double lam : lambdas)
            for (double th : thetas) {
                estimator::EstimatorSpec s = grid.base;
                s.lambda = lam;
                s.theta = th;
                try {
                    s.volterra().validate();
                } catch (const InvalidInput&) {
                    if (pruned) pruned->emplace_back(lam, th);
                    continue;
                }
                for (double r : regs) {
                    s.lambda_reg = r;
                    out.push_back(s);
                }
            }
    } else {
        const auto& taus = grid.taus.empty() ? std::vector<int>{grid.base.tau} : grid.taus;
        const auto& ps = grid.ps.empty() ? std::vector<int>{grid.base.p} : grid.ps;
        for (int tau : taus)
            for (int p : ps)
                for (double r : regs) {
                    estimator::EstimatorSpec s = grid.base;
                    s.tau = tau;
                    s.p = p;
                    s.lambda_reg = r;
                    // Lagged presets use washout = tau.
                    s.washout = std::max<Index>(grid.base.washout, tau);
                    out.push_back(s);
                }
    }
    return out;
}

bool simpler(const estimator::EstimatorSpec& a, const estimator::EstimatorSpec& b) {
    if (a.family != estimator::EstimatorFamily::volterra) {
        if (a.p != b.p) return a.p < b.p;
        if (a.tau != b.tau) return a.tau < b.tau;
    }
    return a.lambda_reg > b.lambda_reg;
}

namespace {

double fold_mse(const estimator::EstimatorSpec& spec, const Fold& f, TaskMode mode, const Matrix& inputs,
                const Matrix& outputs) {
    const Index len = f.train_end - f.train_begin;
    try {
        if (mode == TaskMode::path_continuation) {
            const Matrix x = inputs.middleRows(f.train_begin, len - 1);
            const Matrix y = inputs.middleRows(f.train_begin + 1, len - 1);
            const auto model = estimator::fit(spec, x, y);
            const Matrix warm = inputs.row(f.train_end - 1);
            const Matrix ref = inputs.middleRows(f.val_begin, f.val_end - f.val_begin);
            const auto run = forecast::path_continue(model, warm, ref);
            if (run.truncated) return std::numeric_limits<double>::infinity();
            const double mse = (run.predicted - ref).squaredNorm() / static_cast<double>(ref.size());
            return std::isfinite(mse) ? mse : std::numeric_limits<double>::infinity();
        }
        const auto model = estimator::fit(spec, inputs.middleRows(f.train_begin, len),
                                          outputs.middleRows(f.train_begin, len));
        const Matrix ref = outputs.middleRows(f.val_begin, f.val_end - f.val_begin);
        const auto run =
            forecast::open_loop(model, inputs.middleRows(f.val_begin, f.val_end - f.val_begin), ref);
        if (run.truncated) return std::numeric_limits<double>::infinity();
        const double mse = (run.predicted - ref).squaredNorm() / static_cast<double>(ref.size());
        return std::isfinite(mse) ? mse : std::numeric_limits<double>::infinity();
    } catch (const ConditioningError&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace

GridResult grid_search(const Grid& grid, const FoldPlan& plan, TaskMode mode, const Matrix& inputs,
                       const Matrix& outputs) {
    if (plan.folds.empty()) throw InvalidInput("fold plan is empty");
    if (mode == TaskMode::open_loop && outputs.rows() != inputs.rows())
        throw InvalidInput("inputs and outputs disagree on length");
    for (const auto& f : plan.folds)
        if (f.val_end > inputs.rows() || f.train_end - f.train_begin < 2 || f.val_begin < f.train_end)
            throw InvalidInput("fold geometry does not fit the data");

    GridResult result;
    const auto specs = expand(grid, &result.pruned);
    if (specs.empty()) throw InvalidInput("grid has no feasible candidates");
    const std::size_t nf = plan.folds.size();
    result.table.resize(specs.size());
    std::vector<double> scores(specs.size() * nf, 0.0);
    std::vector<std::string> errors(specs.size() * nf);
    parallel_for(specs.size() * nf, [&](std::size_t begin, std::size_t end) {
        for (std::size_t job = begin; job < end; ++job) {
            const std::size_t c = job / nf, k = job % nf;
            try {
                scores[job] = fold_mse(specs[c], plan.folds[k], mode, inputs, outputs);
            } catch (const Error& e) {
                scores[job] = std::numeric_limits<double>::quiet_NaN();
                errors[job] = e.what();
            }
        }
    });

    for (std::size_t c = 0; c < specs.size(); ++c) {
        auto& row = result.table[c];
        row.spec = specs[c];
        row.fold_mse.assign(scores.begin() + static_cast<std::ptrdiff_t>(c * nf),
                            scores.begin() + static_cast<std::ptrdiff_t>((c + 1) * nf));
        double sum = 0;
        for (std::size_t k = 0; k < nf; ++k) {
            if (!errors[c * nf + k].empty() && row.error.empty()) row.error = errors[c * nf + k];
            sum += row.fold_mse[k];
        }
        row.mse = row.error.empty() ? sum / static_cast<double>(nf) : std::numeric_limits<double>::quiet_NaN();
    }

    Index best = -1;
    for (std::size_t c = 0; c < specs.size(); ++c) {
        const auto& row = result.table[c];
        if (!row.error.empty() || std::isnan(row.mse)) continue;
        if (best < 0) {
            best = static_cast<Index>(c);
            continue;
        }
        const auto& cur = result.table[best];
        if (row.mse < cur.mse || (row.mse == cur.mse && simpler(row.spec, cur.spec))) best = static_cast<Index>(c);
    }
    if (best < 0 || !std::isfinite(result.table[best].mse)) {
        std::string detail;
        for (const auto& row : result.table)
            detail += "\n  " + row.spec.describe() + ": " + (row.error.empty() ? "diverged" : row.error);
        throw Error("every grid candidate failed:" + detail);
    }
    result.best_index = best;
    result.best = result.table[best].spec;
    return result;
}

}  // namespace vrc::cv
