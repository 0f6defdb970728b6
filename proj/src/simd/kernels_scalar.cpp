#include "kernels_internal.hpp"

namespace vrc::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t n4 = n - n % 4;
    for (std::size_t i = 0; i < n4; i += 4) {
        s[0] = s[0] + a[i] * b[i];
        s[1] = s[1] + a[i + 1] * b[i + 1];
        s[2] = s[2] + a[i + 2] * b[i + 2];
        s[3] = s[3] + a[i + 3] * b[i + 3];
    }
    for (std::size_t i = n4; i < n; ++i) s[i - n4] = s[i - n4] + a[i] * b[i];
    return (s[0] + s[1]) + (s[2] + s[3]);
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void volterra_row_scalar(const double* prev, const double* dots, double lam2, double theta2,
                         double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 + (lam2 * prev[i]) / (1.0 - theta2 * dots[i]);
}

void poly_row_scalar(const double* dots, double c, int p, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double base = c + dots[i];
        double r = base;
        for (int k = 1; k < p; ++k) r = r * base;
        out[i] = r;
    }
}

constexpr KernelTable kScalar{Isa::scalar, dot_scalar, axpy_scalar, mul_scalar, volterra_row_scalar,
                              poly_row_scalar};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace vrc::simd
