#include "seedforge/simd/similarity.hpp"

#if defined(SEEDFORGE_HAVE_NEON_KERNELS)

#include <arm_neon.h>

namespace seedforge::simd::neon {

double dot(const float* a, const float* b, std::size_t n) noexcept {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t va = vld1q_f32(a + i);
        const float32x4_t vb = vld1q_f32(b + i);
        acc0 = vfmaq_f64(acc0, vcvt_f64_f32(vget_low_f32(va)), vcvt_f64_f32(vget_low_f32(vb)));
        acc1 = vfmaq_f64(acc1, vcvt_high_f64_f32(va), vcvt_high_f64_f32(vb));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

double squared_norm(const float* a, std::size_t n) noexcept { return dot(a, a, n); }

void dot_many(const float* query, const float* rows, std::size_t dim, std::size_t count,
              double* out) noexcept {
    for (std::size_t r = 0; r < count; ++r) out[r] = dot(query, rows + r * dim, dim);
}

}  // namespace seedforge::simd::neon

#endif
