#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "seedforge/simd/similarity.hpp"

namespace seedforge::simd {

namespace {

struct KernelTable {
    Isa isa;
    double (*dot)(const float*, const float*, std::size_t) noexcept;
    double (*squared_norm)(const float*, std::size_t) noexcept;
    void (*dot_many)(const float*, const float*, std::size_t, std::size_t, double*) noexcept;
};

constexpr KernelTable kScalar{Isa::scalar, &scalar::dot, &scalar::squared_norm,
                              &scalar::dot_many};
#if defined(SEEDFORGE_HAVE_AVX2_KERNELS)
constexpr KernelTable kAvx2{Isa::avx2, &avx2::dot, &avx2::squared_norm, &avx2::dot_many};
#endif
#if defined(SEEDFORGE_HAVE_NEON_KERNELS)
constexpr KernelTable kNeon{Isa::neon, &neon::dot, &neon::squared_norm, &neon::dot_many};
#endif

const KernelTable* table_for(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar:
            return &kScalar;
        case Isa::avx2:
#if defined(SEEDFORGE_HAVE_AVX2_KERNELS)
            return &kAvx2;
#else
            return nullptr;
#endif
        case Isa::neon:
#if defined(SEEDFORGE_HAVE_NEON_KERNELS)
            return &kNeon;
#else
            return nullptr;
#endif
    }
    return nullptr;
}

const KernelTable* initial_table() noexcept {
    if (const char* forced = std::getenv("SEEDFORGE_SIMD")) {
        const std::string name(forced);
        for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
            if (name == isa_name(isa) && isa_available(isa)) return table_for(isa);
        }
    }
    if (isa_available(Isa::avx2)) return table_for(Isa::avx2);
    if (isa_available(Isa::neon)) return table_for(Isa::neon);
    return &kScalar;
}

std::atomic<const KernelTable*>& active() noexcept {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

bool isa_available(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(SEEDFORGE_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::neon:
#if defined(SEEDFORGE_HAVE_NEON_KERNELS)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Isa active_isa() noexcept { return active().load()->isa; }

void set_isa(Isa isa) {
    if (!isa_available(isa)) {
        throw std::invalid_argument("SIMD variant not available: " + std::string(isa_name(isa)));
    }
    active().store(table_for(isa));
}

double dot(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    return active().load()->dot(a.data(), b.data(), a.size());
}

double squared_norm(std::span<const float> a) {
    return active().load()->squared_norm(a.data(), a.size());
}

void dot_many(std::span<const float> query, std::span<const float> rows, std::size_t dim,
              std::span<double> out) {
    if (query.size() != dim || dim == 0 || rows.size() % dim != 0 ||
        rows.size() / dim != out.size()) {
        throw std::invalid_argument("dot_many: shape mismatch");
    }
    active().load()->dot_many(query.data(), rows.data(), dim, out.size(), out.data());
}

}  // namespace seedforge::simd
