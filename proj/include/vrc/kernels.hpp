#pragma once

#include <span>
#include <string>

#include "vrc/linsolve.hpp"
#include "vrc/ngrc.hpp"
#include "vrc/types.hpp"

namespace vrc::kernels {

struct PolyKernelParams {
    int p = 2;
    double c = 1.0;
    int tau = 1;
    void validate() const;
};

/// Value assigned to Gram entries whose recursion runs past the sample start.
enum class VolterraBorder {
    zero_padded,  // 1/(1 - lambda^2): exact value for left zero-padded inputs
    theta,        // 1/(1 - theta^2)
};

struct VolterraParams {
    double lambda = 0.5;
    double theta = 0.5;
    double M = 1.0;  // bound on the Euclidean norm of every input
    VolterraBorder border = VolterraBorder::zero_padded;

    /// Requires theta^2 M^2 < 1 and 0 < lambda < sqrt(1 - theta^2 M^2).
    void validate() const;
    double border_value() const;
    /// lambda^2 / (1 - theta^2 M^2): per-lag decay bound of the series form.
    double decay_ratio() const;
};

/// Relative slack on the input norm bound; scaling to max norm 1 can round up.
inline constexpr double kNormSlack = 1e-12;

double poly_kernel(std::span<const double> u, std::span<const double> v, const PolyKernelParams& params);
double ngrc_kernel(std::span<const double> u, std::span<const double> v, const ngrc::ExponentTable& table);

enum class GramKind { square_train, rectangular_extension };

struct GramMatrix {
    Matrix values;
    GramKind kind = GramKind::square_train;
    std::string descriptor;
};

/// K(i, j) = (c + a_i . b_j)^p for delay rows a (n x w) and b (m x w).
GramMatrix poly_gram(const Matrix& a_rows, const Matrix& b_rows, const PolyKernelParams& params);
GramMatrix poly_gram(const Matrix& rows, const PolyKernelParams& params);

/// K = Phi(A) Phi(B)^T.
GramMatrix ngrc_gram(const Matrix& a_rows, const Matrix& b_rows, const ngrc::ExponentTable& table);
GramMatrix ngrc_gram(const Matrix& rows, const ngrc::ExponentTable& table);

/// Square Volterra Gram of the left zero-padded sequence z_1..z_n (rows of inputs):
/// K(i,j) = 1 + lambda^2 K(i-1,j-1) / (1 - theta^2 <z_i, z_j>), border entries
/// K(0,.) = K(.,0) = params.border_value(). Built across diagonal bands in parallel.
GramMatrix volterra_gram(const Matrix& inputs, const VolterraParams& params);

/// n x h block K(i, n+j) for test inputs continuing the training sequence.
GramMatrix volterra_gram_extend(const Matrix& train, const Matrix& test, const VolterraParams& params);

/// Next Gram column for one appended input: out(i) = 1 + lambda^2 prev(i-1) /
/// (1 - theta^2 <z_i, z_new>), prev(-1) = border. train_by_dim is d x n.
void volterra_next_column(const Matrix& train_by_dim, std::span<const double> z_new, const Vector& prev,
                          const VolterraParams& params, Vector& out);

/// Throws InvalidInput if any row norm exceeds M.
void check_norm_bound(const Matrix& inputs, const VolterraParams& params, const char* what);

struct TruncatedSeries {
    double value = 0;
    double tail_bound = 0;  // bound on |exact - value|
};

/// Series form of the Volterra kernel between the left zero-padded sequences
/// ending at the last rows of seq_a and seq_b, truncated after tau_max lags.
TruncatedSeries volterra_kernel_truncated(const Matrix& seq_a, const Matrix& seq_b, const VolterraParams& params,
                                          int tau_max);

enum class KernelKind { ngrc, polynomial, volterra };

struct KernelDescriptor {
    KernelKind kind = KernelKind::volterra;
    int tau = 1;
    int p = 2;
    double c = 1.0;
    VolterraParams volterra;

    bool lagged() const { return kind != KernelKind::volterra; }
    std::string describe() const;
};

struct KernelModel {
    KernelDescriptor kernel;
    Index d = 0;
    // Lagged kernels: delay rows of the fitted samples. Volterra: the full input
    // sequence, since every Gram entry depends on the whole history.
    Matrix train_rows;
    Matrix alpha;      // fitted samples x m
    Index washout = 0;  // leading samples excluded from the fit
    double lambda_reg = 0;
    Vector last_column;  // Volterra: K(., n) over all n training inputs
    ngrc::ExponentTable exponents;  // NG-RC kernel only
    linsolve::RidgeSolution diagnostics;
};

/// Kernel ridge fit. For lagged kernels the first max(washout, tau) - 1 samples
/// are consumed; for Volterra the first `washout` samples are excluded.
KernelModel fit_kernel_model(const Matrix& inputs, const Matrix& targets, const KernelDescriptor& kernel,
                             double lambda_reg, Index washout,
                             linsolve::GramMethod method = linsolve::GramMethod::automatic);

/// Lagged kernels: one prediction per delay row. Volterra: new_inputs continue
/// the training sequence and row j is the forecast at horizon j.
Matrix predict_kernel(const KernelModel& model, const Matrix& new_inputs);

}  // namespace vrc::kernels
