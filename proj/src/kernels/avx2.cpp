// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "fito/kernels.hpp"

namespace fito::kernels {

namespace {

double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double shifted_diff_dot(const double* w, const double* x, std::size_t n, std::size_t k) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x + j + k), _mm256_loadu_pd(x + j));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(x + j + k + 4), _mm256_loadu_pd(x + j + 4));
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + j), d0, acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(w + j + 4), d1, acc1);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; j < n; ++j) s += w[j] * (x[j + k] - x[j]);
    return s;
}

void increment_products(const double* f, const double* g, std::size_t n, std::size_t k,
                        double* out) {
    // Plain multiply (no FMA) so the result is symmetric in f and g.
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d df = _mm256_sub_pd(_mm256_loadu_pd(f + j + k), _mm256_loadu_pd(f + j));
        const __m256d dg = _mm256_sub_pd(_mm256_loadu_pd(g + j + k), _mm256_loadu_pd(g + j));
        _mm256_storeu_pd(out + j, _mm256_mul_pd(df, dg));
    }
    for (; j < n; ++j) out[j] = (f[j + k] - f[j]) * (g[j + k] - g[j]);
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j + 4), _mm256_loadu_pd(b + j + 4), acc1);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; j < n; ++j) s += a[j] * b[j];
    return s;
}

double sum_sq_increments(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + j + 1), _mm256_loadu_pd(x + j));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; j < n; ++j) {
        const double d = x[j + 1] - x[j];
        s += d * d;
    }
    return s;
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{"avx2", shifted_diff_dot, increment_products, dot,
                                   sum_sq_increments};
    return table;
}

}  // namespace fito::kernels
