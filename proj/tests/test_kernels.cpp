#include <cmath>
#include <random>

#include "doctest.h"
#include "fito/kernels.hpp"
#include "fito/regcalc.hpp"
#include "fito/sde.hpp"

using namespace fito;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(gen);
    return v;
}

double scale_of(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) s += std::abs(a[i] * b[i]);
    return s + 1.0;
}

}  // namespace

TEST_CASE("scalar table is always available") {
    const auto names = kernels::available();
    REQUIRE_FALSE(names.empty());
    CHECK(names.front() == "scalar");
    CHECK_FALSE(kernels::select("neon-does-not-exist"));
}

#if defined(FITO_HAVE_AVX2)
TEST_CASE("AVX2 kernels match the scalar reference") {
    const auto names = kernels::available();
    if (std::find(names.begin(), names.end(), "avx2") == names.end()) {
        MESSAGE("CPU lacks AVX2; equivalence not exercised");
        return;
    }
    const kernels::KernelTable& ref = kernels::scalar_table();
    const kernels::KernelTable& simd = kernels::avx2_table();
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 100u, 1001u, 4099u}) {
        for (std::size_t k : {1u, 2u, 3u, 4u, 5u, 8u, 13u}) {
            const auto w = random_vector(n, 7 * n + k);
            const auto x = random_vector(n + k, 11 * n + k);
            const auto y = random_vector(n + k, 13 * n + k);
            const double a = ref.shifted_diff_dot(w.data(), x.data(), n, k);
            const double b = simd.shifted_diff_dot(w.data(), x.data(), n, k);
            CHECK(std::abs(a - b) <= 1e-14 * 4.0 * scale_of(w, x));

            std::vector<double> pa(n), pb(n);
            ref.increment_products(x.data(), y.data(), n, k, pa.data());
            simd.increment_products(x.data(), y.data(), n, k, pb.data());
            CHECK(pa == pb);
            // Symmetry in (f, g) is exact in both variants.
            std::vector<double> swapped(n);
            simd.increment_products(y.data(), x.data(), n, k, swapped.data());
            CHECK(swapped == pb);
        }
        const auto u = random_vector(n, 3 * n + 1);
        const auto v = random_vector(n, 5 * n + 2);
        CHECK(std::abs(ref.dot(u.data(), v.data(), n) - simd.dot(u.data(), v.data(), n)) <=
              1e-14 * 4.0 * scale_of(u, v));
        const auto p = random_vector(n + 1, 17 * n);
        const double sa = ref.sum_sq_increments(p.data(), n);
        const double sb = simd.sum_sq_increments(p.data(), n);
        CHECK(std::abs(sa - sb) <= 1e-14 * (1.0 + sa));
    }
}

TEST_CASE("regularized operators agree under both kernel sets") {
    const auto names = kernels::available();
    if (std::find(names.begin(), names.end(), "avx2") == names.end()) return;
    const auto w = brownian_sample(-1.0, 1.0, 4096, 1.0, 77);
    const auto g = SampledFunction::from(-1.0, 1.0, 4096, [](double x) { return std::cos(x); });

    REQUIRE(kernels::select("scalar"));
    const RegIntegralResult f_ref = forward_integral(g, w, -1.0, 1.0);
    const RegIntegralResult b_ref = backward_integral(g, w, -1.0, 1.0);
    const CovariationResult q_ref = quadratic_variation(w, -1.0, 1.0);
    REQUIRE(kernels::select("avx2"));
    const RegIntegralResult f_simd = forward_integral(g, w, -1.0, 1.0);
    const RegIntegralResult b_simd = backward_integral(g, w, -1.0, 1.0);
    const CovariationResult q_simd = quadratic_variation(w, -1.0, 1.0);

    for (std::size_t e = 0; e < f_ref.per_eps.size(); ++e) {
        CHECK(f_simd.per_eps[e] == doctest::Approx(f_ref.per_eps[e]).epsilon(1e-12));
        CHECK(b_simd.per_eps[e] == doctest::Approx(b_ref.per_eps[e]).epsilon(1e-12));
    }
    for (std::size_t j = 0; j < q_ref.value.values.size(); ++j) {
        CHECK(std::abs(q_simd.value.values[j] - q_ref.value.values[j]) <= 1e-12);
    }
    CHECK(std::string(kernels::active().name) == "avx2");
}
#endif
