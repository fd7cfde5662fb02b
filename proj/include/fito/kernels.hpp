#pragma once

// Inner loops of the quadrature and covariation code. A scalar reference
// implementation is always built; an AVX2/FMA variant is selected at runtime
// when the CPU supports it. FITO_SIMD=scalar forces the reference kernels.

#include <cstddef>
#include <string_view>
#include <vector>

namespace fito::kernels {

struct KernelTable {
    const char* name;
    // sum_{j<n} w[j] * (x[j+k] - x[j]); x holds n + k values.
    double (*shifted_diff_dot)(const double* w, const double* x, std::size_t n, std::size_t k);
    // out[j] = (f[j+k] - f[j]) * (g[j+k] - g[j]) for j < n.
    void (*increment_products)(const double* f, const double* g, std::size_t n, std::size_t k,
                               double* out);
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_{j<n} (x[j+1] - x[j])^2; x holds n + 1 values.
    double (*sum_sq_increments)(const double* x, std::size_t n);
};

const KernelTable& scalar_table();
#if defined(FITO_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

// Names of the variants usable on this machine, reference first.
std::vector<std::string_view> available();

// The active table. Chosen once from the CPU and FITO_SIMD; may be overridden.
const KernelTable& active();
// Select a variant by name; returns false when it is unavailable.
bool select(std::string_view name);

}  // namespace fito::kernels
