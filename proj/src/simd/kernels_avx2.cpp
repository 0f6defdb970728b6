#include <immintrin.h>

#include "kernels_internal.hpp"

namespace vrc::simd {
namespace {

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n4 = n - n % 4;
    for (std::size_t i = 0; i < n4; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    alignas(32) double s[4];
    _mm256_store_pd(s, acc);
    for (std::size_t i = n4; i < n; ++i) s[i - n4] = s[i - n4] + a[i] * b[i];
    return (s[0] + s[1]) + (s[2] + s[3]);
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
    for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void volterra_row_avx2(const double* prev, const double* dots, double lam2, double theta2, double* out,
                       std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d vl = _mm256_set1_pd(lam2);
    const __m256d vt = _mm256_set1_pd(theta2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d num = _mm256_mul_pd(vl, _mm256_loadu_pd(prev + i));
        const __m256d den = _mm256_sub_pd(one, _mm256_mul_pd(vt, _mm256_loadu_pd(dots + i)));
        _mm256_storeu_pd(out + i, _mm256_add_pd(one, _mm256_div_pd(num, den)));
    }
    for (; i < n; ++i) out[i] = 1.0 + (lam2 * prev[i]) / (1.0 - theta2 * dots[i]);
}

void poly_row_avx2(const double* dots, double c, int p, double* out, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d base = _mm256_add_pd(vc, _mm256_loadu_pd(dots + i));
        __m256d r = base;
        for (int k = 1; k < p; ++k) r = _mm256_mul_pd(r, base);
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) {
        const double base = c + dots[i];
        double r = base;
        for (int k = 1; k < p; ++k) r = r * base;
        out[i] = r;
    }
}

constexpr KernelTable kAvx2{Isa::avx2, dot_avx2, axpy_avx2, mul_avx2, volterra_row_avx2, poly_row_avx2};

}  // namespace

namespace detail {
const KernelTable* avx2_table() { return &kAvx2; }
}  // namespace detail

}  // namespace vrc::simd
