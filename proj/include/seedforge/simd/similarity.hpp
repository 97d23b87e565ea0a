#pragma once

// Vector similarity kernels. Inputs are float (embedding storage), all
// accumulation is in double. Every kernel has a scalar reference in
// `scalar::`; the dispatched entry points pick the widest variant the CPU
// supports at runtime. SEEDFORGE_SIMD=scalar|avx2|neon overrides the choice.

#include <cstddef>
#include <span>
#include <string_view>

namespace seedforge::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;

// True when the variant is compiled in and the CPU can run it.
bool isa_available(Isa isa) noexcept;

Isa active_isa() noexcept;

// Switches the dispatched kernels; throws std::invalid_argument when the
// variant is unavailable. Not thread-safe against concurrent kernel calls.
void set_isa(Isa isa);

double dot(std::span<const float> a, std::span<const float> b);
double squared_norm(std::span<const float> a);

// out[i] = dot(query, rows[i*dim, (i+1)*dim)) for each row.
void dot_many(std::span<const float> query, std::span<const float> rows, std::size_t dim,
              std::span<double> out);

namespace scalar {
double dot(const float* a, const float* b, std::size_t n) noexcept;
double squared_norm(const float* a, std::size_t n) noexcept;
void dot_many(const float* query, const float* rows, std::size_t dim, std::size_t count,
              double* out) noexcept;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define SEEDFORGE_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const float* a, const float* b, std::size_t n) noexcept;
double squared_norm(const float* a, std::size_t n) noexcept;
void dot_many(const float* query, const float* rows, std::size_t dim, std::size_t count,
              double* out) noexcept;
}  // namespace avx2
#endif

#if defined(__aarch64__)
#define SEEDFORGE_HAVE_NEON_KERNELS 1
namespace neon {
double dot(const float* a, const float* b, std::size_t n) noexcept;
double squared_norm(const float* a, std::size_t n) noexcept;
void dot_many(const float* query, const float* rows, std::size_t dim, std::size_t count,
              double* out) noexcept;
}  // namespace neon
#endif

}  // namespace seedforge::simd
