#include "vrc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "vrc/error.hpp"
#include "vrc/parallel.hpp"
#include "vrc/simd.hpp"

namespace vrc::kernels {
namespace {

using ColMatrix = Eigen::MatrixXd;

// d x n, one contiguous row per input dimension.
Matrix by_dimension(const Matrix& rows) { return rows.transpose(); }

// Fills out(i, j) = 1 + lambda^2 P(i-1, j-1) / (1 - theta^2 <a_i, b_j>) with
// P(r, c) = out(r, c), P(-1, c) = border and P(r, -1) = left[r] (border when
// left is empty). Entry (i, j) only depends on its own diagonal, so disjoint
// bands of diagonals are filled independently.
void volterra_fill(const Matrix& a_dim, const Matrix& b_dim, const Vector& left, const VolterraParams& params,
                   bool upper_only, Matrix& out) {
    const Index n = a_dim.cols(), m = b_dim.cols(), d = a_dim.rows();
    const double lam2 = params.lambda * params.lambda;
    const double theta2 = params.theta * params.theta;
    const double border = params.border_value();
    const Index k_min = upper_only ? 0 : -(n - 1);
    const Index k_max = m - 1;
    if (n == 0 || m == 0 || k_max < k_min) return;

    const Index diagonals = k_max - k_min + 1;
    const Index threads = static_cast<Index>(max_threads());
    const Index bands = threads <= 1 ? 1 : std::min<Index>(diagonals, threads * 4);
    const Index band_width = (diagonals + bands - 1) / bands;
    const auto& kern = simd::kernels();

    parallel_for(static_cast<std::size_t>(bands), [&](std::size_t begin, std::size_t end) {
        std::vector<double> dots, prev;
        for (std::size_t band = begin; band < end; ++band) {
            const Index k0 = k_min + static_cast<Index>(band) * band_width;
            const Index k1 = std::min(k_max + 1, k0 + band_width);
            for (Index i = 0; i < n; ++i) {
                const Index j0 = std::max<Index>(0, i + k0);
                const Index j1 = std::min<Index>(m, i + k1);
                if (j0 >= j1) continue;
                const std::size_t len = static_cast<std::size_t>(j1 - j0);
                dots.assign(len, 0.0);
                prev.resize(len);
                for (Index dim = 0; dim < d; ++dim) kern.axpy(a_dim(dim, i), &b_dim(dim, j0), dots.data(), len);
                for (Index j = j0; j < j1; ++j) {
                    double p;
                    if (i == 0)
                        p = border;
                    else if (j == 0)
                        p = left.size() ? left(i - 1) : border;
                    else
                        p = out(i - 1, j - 1);
                    prev[j - j0] = p;
                }
                kern.volterra_row(prev.data(), dots.data(), lam2, theta2, &out(i, j0), len);
            }
        }
    });
}

}  // namespace

void PolyKernelParams::validate() const {
    if (p < 1) throw InvalidInput("polynomial kernel degree must be >= 1");
    if (!(c > 0.0)) throw InvalidInput("polynomial kernel offset c must be positive");
    if (tau < 1) throw InvalidInput("polynomial kernel tau must be >= 1");
}

void VolterraParams::validate() const {
    if (!(theta > 0.0) || !(M > 0.0)) throw InvalidInput("Volterra theta and M must be positive");
    const double slack = 1.0 - theta * theta * M * M;
    if (!(slack > 0.0)) throw InvalidInput("Volterra parameters violate theta^2 M^2 < 1");
    if (!(lambda > 0.0) || !(lambda < std::sqrt(slack)))
        throw InvalidInput("Volterra parameters violate 0 < lambda < sqrt(1 - theta^2 M^2)");
}

double VolterraParams::border_value() const {
    return border == VolterraBorder::theta ? 1.0 / (1.0 - theta * theta) : 1.0 / (1.0 - lambda * lambda);
}

double VolterraParams::decay_ratio() const { return lambda * lambda / (1.0 - theta * theta * M * M); }

double poly_kernel(std::span<const double> u, std::span<const double> v, const PolyKernelParams& params) {
    if (u.size() != v.size()) throw InvalidInput("polynomial kernel arguments differ in length");
    double ip = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) ip = ip + u[k] * v[k];
    const double base = params.c + ip;
    double r = base;
    for (int k = 1; k < params.p; ++k) r = r * base;
    return r;
}

double ngrc_kernel(std::span<const double> u, std::span<const double> v, const ngrc::ExponentTable& table) {
    return ngrc::ngrc_features(u, table).dot(ngrc::ngrc_features(v, table));
}

GramMatrix poly_gram(const Matrix& a_rows, const Matrix& b_rows, const PolyKernelParams& params) {
    params.validate();
    if (a_rows.cols() != b_rows.cols()) throw InvalidInput("polynomial Gram operands differ in width");
    const Index n = a_rows.rows(), m = b_rows.rows(), w = a_rows.cols();
    const Matrix b_dim = by_dimension(b_rows);
    GramMatrix g;
    g.values.resize(n, m);
    g.kind = GramKind::rectangular_extension;
    g.descriptor = "polynomial(p=" + std::to_string(params.p) + ",tau=" + std::to_string(params.tau) + ")";
    const auto& kern = simd::kernels();
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
        std::vector<double> dots(static_cast<std::size_t>(m));
        for (std::size_t i = begin; i < end; ++i) {
            std::fill(dots.begin(), dots.end(), 0.0);
            for (Index k = 0; k < w; ++k) kern.axpy(a_rows(i, k), &b_dim(k, 0), dots.data(), dots.size());
            kern.poly_row(dots.data(), params.c, params.p, &g.values(i, 0), dots.size());
        }
    }, 16);
    return g;
}

GramMatrix poly_gram(const Matrix& rows, const PolyKernelParams& params) {
    GramMatrix g = poly_gram(rows, rows, params);
    g.kind = GramKind::square_train;
    return g;
}

GramMatrix ngrc_gram(const Matrix& a_rows, const Matrix& b_rows, const ngrc::ExponentTable& table) {
    const ColMatrix fa = ngrc::feature_matrix(a_rows, table);
    const ColMatrix fb = ngrc::feature_matrix(b_rows, table);
    GramMatrix g;
    g.values = fa * fb.transpose();
    g.kind = GramKind::rectangular_extension;
    g.descriptor = "ngrc(p=" + std::to_string(table.p()) + ",tau=" + std::to_string(table.tau()) + ")";
    return g;
}

GramMatrix ngrc_gram(const Matrix& rows, const ngrc::ExponentTable& table) {
    const ColMatrix f = ngrc::feature_matrix(rows, table);
    ColMatrix k = ColMatrix::Zero(f.rows(), f.rows());
    k.selfadjointView<Eigen::Lower>().rankUpdate(f);
    GramMatrix g;
    g.values = k.selfadjointView<Eigen::Lower>();
    g.kind = GramKind::square_train;
    g.descriptor = "ngrc(p=" + std::to_string(table.p()) + ",tau=" + std::to_string(table.tau()) + ")";
    return g;
}

void check_norm_bound(const Matrix& inputs, const VolterraParams& params, const char* what) {
    const double limit = params.M * (1.0 + kNormSlack);
    for (Index i = 0; i < inputs.rows(); ++i) {
        const double norm = inputs.row(i).norm();
        if (!(norm <= limit)) {
            std::ostringstream msg;
            msg << what << " row " << i << " has norm " << norm << " exceeding the Volterra bound M=" << params.M;
            throw InvalidInput(msg.str());
        }
    }
}

GramMatrix volterra_gram(const Matrix& inputs, const VolterraParams& params) {
    params.validate();
    check_norm_bound(inputs, params, "Volterra input");
    const Matrix z_dim = by_dimension(inputs);
    const Index n = inputs.rows();
    GramMatrix g;
    g.values.resize(n, n);
    volterra_fill(z_dim, z_dim, Vector(), params, true, g.values);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < i; ++j) g.values(i, j) = g.values(j, i);
    g.kind = GramKind::square_train;
    std::ostringstream desc;
    desc.precision(17);
    desc << "volterra(lambda=" << params.lambda << ",theta=" << params.theta << ")";
    g.descriptor = desc.str();
    return g;
}

GramMatrix volterra_gram_extend(const Matrix& train, const Matrix& test, const VolterraParams& params) {
    if (train.cols() != test.cols()) throw InvalidInput("train and test inputs differ in dimension");
    check_norm_bound(test, params, "Volterra test input");
    const GramMatrix square = volterra_gram(train, params);
    const Index n = train.rows();
    GramMatrix g;
    g.values.resize(n, test.rows());
    const Vector left = n > 0 ? Vector(square.values.col(n - 1)) : Vector();
    volterra_fill(by_dimension(train), by_dimension(test), left, params, false, g.values);
    g.kind = GramKind::rectangular_extension;
    g.descriptor = square.descriptor;
    return g;
}

void volterra_next_column(const Matrix& train_by_dim, std::span<const double> z_new, const Vector& prev,
                          const VolterraParams& params, Vector& out) {
    const Index n = train_by_dim.cols(), d = train_by_dim.rows();
    if (static_cast<Index>(z_new.size()) != d) throw InvalidInput("new Volterra input has the wrong dimension");
    double norm2 = 0.0;
    for (double v : z_new) norm2 += v * v;
    if (!(std::sqrt(norm2) <= params.M * (1.0 + kNormSlack)))
        throw InvalidInput("Volterra input norm " + std::to_string(std::sqrt(norm2)) + " exceeds the bound M");
    const auto& kern = simd::kernels();
    std::vector<double> dots(static_cast<std::size_t>(n), 0.0), shifted(static_cast<std::size_t>(n));
    for (Index dim = 0; dim < d; ++dim) kern.axpy(z_new[dim], &train_by_dim(dim, 0), dots.data(), dots.size());
    if (n > 0) shifted[0] = params.border_value();
    for (Index i = 1; i < n; ++i) shifted[i] = prev(i - 1);
    out.resize(n);
    kern.volterra_row(shifted.data(), dots.data(), params.lambda * params.lambda, params.theta * params.theta,
                      out.data(), dots.size());
}

TruncatedSeries volterra_kernel_truncated(const Matrix& seq_a, const Matrix& seq_b, const VolterraParams& params,
                                          int tau_max) {
    params.validate();
    if (seq_a.cols() != seq_b.cols()) throw InvalidInput("sequences differ in dimension");
    if (tau_max < std::max(seq_a.rows(), seq_b.rows())) throw InvalidInput("tau_max must cover the sequence length");
    const double lam2 = params.lambda * params.lambda;
    const double theta2 = params.theta * params.theta;
    double value = 1.0, weight = 1.0, product = 1.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
        const Index ia = seq_a.rows() - tau, ib = seq_b.rows() - tau;
        const double ip = (ia >= 0 && ib >= 0) ? seq_a.row(ia).dot(seq_b.row(ib)) : 0.0;
        product /= 1.0 - theta2 * ip;
        weight *= lam2;
        value += weight * product;
    }
    const double r = params.decay_ratio();
    return {value, std::pow(r, tau_max + 1) / (1.0 - r)};
}

std::string KernelDescriptor::describe() const {
    std::ostringstream s;
    s.precision(17);
    switch (kind) {
        case KernelKind::ngrc: s << "ngrc-kernel(tau=" << tau << ",p=" << p << ")"; break;
        case KernelKind::polynomial: s << "polynomial(tau=" << tau << ",p=" << p << ",c=" << c << ")"; break;
        case KernelKind::volterra:
            s << "volterra(lambda=" << volterra.lambda << ",theta=" << volterra.theta << ",M=" << volterra.M << ")";
            break;
    }
    return s.str();
}

KernelModel fit_kernel_model(const Matrix& inputs, const Matrix& targets, const KernelDescriptor& kernel,
                             double lambda_reg, Index washout, linsolve::GramMethod method) {
    if (inputs.rows() != targets.rows()) throw InvalidInput("inputs and targets disagree on length");
    if (washout < 0) throw InvalidInput("washout must be non-negative");
    const Index n = inputs.rows();
    KernelModel model;
    model.kernel = kernel;
    model.d = inputs.cols();
    model.lambda_reg = lambda_reg;

    Matrix gram;
    if (kernel.lagged()) {
        if (kernel.tau < 1) throw InvalidInput("kernel tau must be >= 1");
        const Index excluded = std::max<Index>(washout, kernel.tau) - 1;
        if (excluded >= n) throw InvalidInput("washout leaves no training samples");
        model.washout = excluded;
        const Matrix rows = ngrc::delay_vectors(inputs, kernel.tau).bottomRows(n - excluded);
        model.train_rows = rows;
        if (kernel.kind == KernelKind::polynomial) {
            gram = poly_gram(rows, PolyKernelParams{kernel.p, kernel.c, kernel.tau}).values;
        } else {
            model.exponents = ngrc::ExponentTable::build(kernel.tau, static_cast<int>(model.d), kernel.p);
            gram = ngrc_gram(rows, model.exponents).values;
        }
    } else {
        if (washout >= n) throw InvalidInput("washout leaves no training samples");
        model.washout = washout;
        model.train_rows = inputs;
        Matrix full = volterra_gram(inputs, kernel.volterra).values;
        model.last_column = full.col(n - 1);
        gram = full.bottomRightCorner(n - washout, n - washout);
    }
    model.diagnostics = linsolve::solve_ridge_gram(gram, targets.bottomRows(gram.rows()), lambda_reg, method);
    model.alpha = model.diagnostics.coefficients;
    return model;
}

Matrix predict_kernel(const KernelModel& model, const Matrix& new_inputs) {
    const auto& k = model.kernel;
    if (k.lagged()) {
        if (new_inputs.cols() != model.train_rows.cols())
            throw InvalidInput("prediction inputs must be full delay vectors of width tau*d");
        const Matrix cross = k.kind == KernelKind::polynomial
                                 ? poly_gram(new_inputs, model.train_rows, PolyKernelParams{k.p, k.c, k.tau}).values
                                 : ngrc_gram(new_inputs, model.train_rows, model.exponents).values;
        return cross * model.alpha;
    }
    if (new_inputs.cols() != model.d) throw InvalidInput("prediction inputs have the wrong dimension");
    const Matrix train_dim = by_dimension(model.train_rows);
    const Index n = model.train_rows.rows();
    Matrix out(new_inputs.rows(), model.alpha.cols());
    Vector col = model.last_column, next;
    for (Index j = 0; j < new_inputs.rows(); ++j) {
        const Vector z = new_inputs.row(j).transpose();
        volterra_next_column(train_dim, {z.data(), static_cast<std::size_t>(z.size())}, col, k.volterra, next);
        out.row(j) = (model.alpha.transpose() * next.tail(n - model.washout)).transpose();
        col.swap(next);
    }
    return out;
}

}  // namespace vrc::kernels
