#include <atomic>
#include <cstdlib>
#include <string>

#include "fito/kernels.hpp"

namespace fito::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(FITO_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* lookup(std::string_view name) {
    if (name == "scalar") return &scalar_table();
#if defined(FITO_HAVE_AVX2)
    if (name == "avx2" && cpu_has_avx2()) return &avx2_table();
#endif
    return nullptr;
}

const KernelTable* initial() {
    if (const char* env = std::getenv("FITO_SIMD")) {
        if (const KernelTable* t = lookup(env)) return t;
    }
    if (const KernelTable* t = lookup("avx2")) return t;
    return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> current{initial()};
    return current;
}

}  // namespace

std::vector<std::string_view> available() {
    std::vector<std::string_view> names{"scalar"};
    if (lookup("avx2") != nullptr) names.emplace_back("avx2");
    return names;
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

bool select(std::string_view name) {
    const KernelTable* t = lookup(name);
    if (t == nullptr) return false;
    slot().store(t, std::memory_order_release);
    return true;
}

}  // namespace fito::kernels
