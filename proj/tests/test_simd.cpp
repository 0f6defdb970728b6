#include <doctest.h>

#include <cstring>

#include "oracles.hpp"
#include "vrc/kernels.hpp"
#include "vrc/simd.hpp"

using namespace vrc;
using namespace vrc::simd;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = -1, double hi = 1) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

// Scalar loop with the documented reduction order.
double reference_dot(const double* a, const double* b, std::size_t n) {
    double s[4] = {0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int l = 0; l < 4; ++l) s[l] += a[i + l] * b[i + l];
    for (int l = 0; i < n; ++i, ++l) s[l] += a[i] * b[i];
    return (s[0] + s[1]) + (s[2] + s[3]);
}

struct IsaGuard {
    Isa saved = active_isa();
    ~IsaGuard() { set_active_isa(saved); }
};

}  // namespace

TEST_CASE("scalar dot follows the documented reduction order") {
    std::mt19937_64 rng(41);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 64u, 1001u}) {
        const auto a = random_vec(rng, n), b = random_vec(rng, n);
        const double got = scalar_kernels().dot(a.data(), b.data(), n);
        const double want = reference_dot(a.data(), b.data(), n);
        CHECK(std::memcmp(&got, &want, sizeof(double)) == 0);
    }
}

TEST_CASE("vector kernels are bit-identical to the scalar kernels") {
    if (!isa_available(Isa::avx2)) {
        MESSAGE("AVX2 not available on this CPU; equivalence not exercised");
        return;
    }
    const auto& s = kernels_for(Isa::scalar);
    const auto& v = kernels_for(Isa::avx2);
    CHECK(v.isa == Isa::avx2);
    std::mt19937_64 rng(42);
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 8u, 13u, 100u, 1027u}) {
        const auto a = random_vec(rng, n), b = random_vec(rng, n);
        const double ds = s.dot(a.data(), b.data(), n), dv = v.dot(a.data(), b.data(), n);
        CHECK(std::memcmp(&ds, &dv, sizeof(double)) == 0);

        auto ys = b, yv = b;
        s.axpy(0.37, a.data(), ys.data(), n);
        v.axpy(0.37, a.data(), yv.data(), n);
        CHECK(same_bits(ys, yv));

        std::vector<double> ms(n), mv(n);
        s.mul(a.data(), b.data(), ms.data(), n);
        v.mul(a.data(), b.data(), mv.data(), n);
        CHECK(same_bits(ms, mv));

        const auto prev = random_vec(rng, n, 1, 2);
        std::vector<double> rs(n), rv(n);
        s.volterra_row(prev.data(), a.data(), 0.36, 0.49, rs.data(), n);
        v.volterra_row(prev.data(), a.data(), 0.36, 0.49, rv.data(), n);
        CHECK(same_bits(rs, rv));

        for (int p : {1, 2, 5}) {
            s.poly_row(a.data(), 1.0, p, rs.data(), n);
            v.poly_row(a.data(), 1.0, p, rv.data(), n);
            CHECK(same_bits(rs, rv));
        }
    }
}

TEST_CASE("Gram builders give identical bits under either dispatch") {
    IsaGuard guard;
    std::mt19937_64 rng(43);
    Matrix z = oracle::random_matrix(rng, 120, 3);
    for (Index i = 0; i < z.rows(); ++i) z.row(i) /= std::max(1.0, z.row(i).norm());
    const kernels::VolterraParams vp{0.6, 0.7, 1.0};
    const kernels::PolyKernelParams pp{4, 1.0, 1};

    set_active_isa(Isa::scalar);
    const Matrix vs = kernels::volterra_gram(z, vp).values;
    const Matrix ps = kernels::poly_gram(z, pp).values;
    set_active_isa(Isa::avx2);
    const Matrix vv = kernels::volterra_gram(z, vp).values;
    const Matrix pv = kernels::poly_gram(z, pp).values;
    CHECK(std::memcmp(vs.data(), vv.data(), sizeof(double) * vs.size()) == 0);
    CHECK(std::memcmp(ps.data(), pv.data(), sizeof(double) * ps.size()) == 0);
}

TEST_CASE("isa names") {
    CHECK(isa_name(Isa::scalar) == "scalar");
    CHECK(isa_name(Isa::avx2) == "avx2");
    CHECK(isa_available(Isa::scalar));
}
