#include "seedforge/simd/similarity.hpp"

namespace seedforge::simd::scalar {

double dot(const float* a, const float* b, std::size_t n) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

double squared_norm(const float* a, std::size_t n) noexcept { return dot(a, a, n); }

void dot_many(const float* query, const float* rows, std::size_t dim, std::size_t count,
              double* out) noexcept {
    for (std::size_t r = 0; r < count; ++r) out[r] = dot(query, rows + r * dim, dim);
}

}  // namespace seedforge::simd::scalar
