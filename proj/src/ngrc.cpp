#include "vrc/ngrc.hpp"

#include <limits>
#include <map>
#include <string>

#include "vrc/error.hpp"
#include "vrc/simd.hpp"

namespace vrc::ngrc {
namespace {

using ColMatrix = Eigen::MatrixXd;

// Appends every exponent vector of total degree `remaining` over variables
// [var, width) in descending lexicographic order.
void enumerate_degree(int var, int width, int remaining, std::vector<std::uint16_t>& current,
                      std::vector<std::uint16_t>& out) {
    if (var == width - 1) {
        current[var] = static_cast<std::uint16_t>(remaining);
        out.insert(out.end(), current.begin(), current.end());
        current[var] = 0;
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[var] = static_cast<std::uint16_t>(e);
        enumerate_degree(var + 1, width, remaining - e, current, out);
    }
    current[var] = 0;
}

}  // namespace

void DelaySpec::validate() const {
    if (tau < 1 || d < 1) throw InvalidInput("delay spec needs tau >= 1 and d >= 1");
}

std::uint64_t feature_dim(int tau, int d, int p) {
    if (tau < 1 || d < 1 || p < 0) throw InvalidInput("feature_dim needs tau, d >= 1 and p >= 0");
    std::uint64_t width = 0;
    if (__builtin_mul_overflow(static_cast<std::uint64_t>(tau), static_cast<std::uint64_t>(d), &width))
        throw CapacityError("tau*d overflows");
    // C(width + p, p) = prod_{i=1..p} (width + i) / i, exact at every step.
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= static_cast<std::uint64_t>(p); ++i) {
        unsigned __int128 next = static_cast<unsigned __int128>(result) * (width + i);
        next /= i;
        if (next > std::numeric_limits<std::uint64_t>::max()) throw CapacityError("feature dimension overflows 64 bits");
        result = static_cast<std::uint64_t>(next);
    }
    return result;
}

ExponentTable ExponentTable::build(int tau, int d, int p) {
    DelaySpec{tau, d}.validate();
    if (p < 0) throw InvalidInput("polynomial degree must be non-negative");
    const std::uint64_t n = feature_dim(tau, d, p);
    if (n > kMaxFeatureRows)
        throw CapacityError("exponent table with " + std::to_string(n) + " rows exceeds capacity");
    if (p > 65535) throw CapacityError("degree too large");

    ExponentTable t;
    t.tau_ = tau;
    t.d_ = d;
    t.p_ = p;
    const int width = tau * d;
    t.exponents_.reserve(n * width);
    std::vector<std::uint16_t> current(width, 0);
    for (int k = 0; k <= p; ++k) {
        const std::size_t before = t.exponents_.size() / width;
        enumerate_degree(0, width, k, current, t.exponents_);
        const std::size_t after = t.exponents_.size() / width;
        t.degree_.insert(t.degree_.end(), after - before, k);
    }

    std::map<std::vector<std::uint16_t>, Index> index;
    const Index rows = t.size();
    t.parent_.assign(rows, -1);
    t.variable_.assign(rows, -1);
    for (Index k = 0; k < rows; ++k) {
        auto r = t.row(k);
        std::vector<std::uint16_t> key(r.begin(), r.end());
        if (k > 0) {
            int var = 0;
            while (key[var] == 0) ++var;
            std::vector<std::uint16_t> parent = key;
            --parent[var];
            t.parent_[k] = index.at(parent);
            t.variable_[k] = var;
        }
        index.emplace(std::move(key), k);
    }
    return t;
}

Matrix delay_vectors(const Matrix& series, int tau) {
    if (tau < 1) throw InvalidInput("tau must be >= 1");
    const Index n = series.rows(), d = series.cols();
    if (n < tau) throw InvalidInput("series of length " + std::to_string(n) + " is shorter than tau=" + std::to_string(tau));
    Matrix out(n - tau + 1, tau * d);
    for (Index t = 0; t + tau <= n; ++t)
        for (int lag = 0; lag < tau; ++lag) out.row(t).segment(lag * d, d) = series.row(t + lag);
    return out;
}

Vector ngrc_features(std::span<const double> v, const ExponentTable& table) {
    if (static_cast<int>(v.size()) != table.width())
        throw InvalidInput("feature input has length " + std::to_string(v.size()) + ", expected " +
                           std::to_string(table.width()));
    Vector f(table.size());
    f(0) = 1.0;
    for (Index k = 1; k < table.size(); ++k) f(k) = f(table.parent(k)) * v[table.variable(k)];
    return f;
}

Matrix feature_matrix(const Matrix& delay_rows, const ExponentTable& table) {
    if (delay_rows.cols() != table.width()) throw InvalidInput("delay rows do not match the exponent table width");
    const Index n = delay_rows.rows();
    const ColMatrix vars = delay_rows;  // column-major: each variable contiguous over samples
    ColMatrix f(n, table.size());
    f.col(0).setOnes();
    const auto& kern = simd::kernels();
    for (Index k = 1; k < table.size(); ++k)
        kern.mul(f.col(table.parent(k)).data(), vars.col(table.variable(k)).data(), f.col(k).data(),
                 static_cast<std::size_t>(n));
    return Matrix(f);
}

NgrcModel fit_ngrc(const Matrix& inputs, const Matrix& targets, int tau, int p, double lambda_reg,
                   linsolve::PrimalMethod method) {
    if (inputs.rows() != targets.rows()) throw InvalidInput("inputs and targets disagree on length");
    NgrcModel model;
    model.delay = {tau, static_cast<int>(inputs.cols())};
    model.delay.validate();
    model.exponents = ExponentTable::build(tau, model.delay.d, p);
    const Matrix X = feature_matrix(delay_vectors(inputs, tau), model.exponents);
    const Matrix Y = targets.bottomRows(X.rows());
    model.diagnostics = linsolve::solve_ridge_primal(X, Y, lambda_reg, method);
    model.weights = model.diagnostics.coefficients;
    model.lambda_reg = lambda_reg;
    return model;
}

Vector predict_ngrc(const NgrcModel& model, std::span<const double> v) {
    const Vector phi = ngrc_features(v, model.exponents);
    return model.weights.transpose() * phi;
}

}  // namespace vrc::ngrc
