#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops. Every kernel has a scalar reference implementation
// and optional vector variants; all variants produce bit-identical results
// (fixed 4-lane reduction order, no FMA contraction).
namespace vrc::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
    Isa isa;
    // Sum of a[i]*b[i] using four interleaved partial sums combined as
    // (s0+s1)+(s2+s3); the tail is folded into s0..s2 in order.
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // out[i] = a[i] * b[i]
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    // out[i] = 1 + (lam2 * prev[i]) / (1 - theta2 * dots[i])
    void (*volterra_row)(const double* prev, const double* dots, double lam2, double theta2,
                         double* out, std::size_t n);
    // out[i] = (c + dots[i])^p by p-1 successive multiplications
    void (*poly_row)(const double* dots, double c, int p, double* out, std::size_t n);
};

const KernelTable& scalar_kernels();
bool isa_available(Isa isa);
const KernelTable& kernels_for(Isa isa);

/// Active table: the best available ISA unless overridden by set_active_isa or
/// the VRC_SIMD environment variable ("scalar" or "avx2").
const KernelTable& kernels();
Isa active_isa();
void set_active_isa(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace vrc::simd
