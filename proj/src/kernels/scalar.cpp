#include "fito/kernels.hpp"

namespace fito::kernels {

namespace {

double shifted_diff_dot(const double* w, const double* x, std::size_t n, std::size_t k) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += w[j] * (x[j + k] - x[j]);
    return s;
}

void increment_products(const double* f, const double* g, std::size_t n, std::size_t k,
                        double* out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = (f[j + k] - f[j]) * (g[j + k] - g[j]);
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a[j] * b[j];
    return s;
}

double sum_sq_increments(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = x[j + 1] - x[j];
        s += d * d;
    }
    return s;
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{"scalar", shifted_diff_dot, increment_products, dot,
                                   sum_sq_increments};
    return table;
}

}  // namespace fito::kernels
