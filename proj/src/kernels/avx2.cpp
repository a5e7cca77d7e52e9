// AVX2 kernel variants. Compiled with -mavx2 only; runtime selection happens
// in dispatch.cpp. Every function performs the exact same elementwise
// operations as the scalar reference (no FMA, no reassociation), so outputs
// are bit-identical.

#include <immintrin.h>

#include <cmath>

#include "lanekit/kernels.hpp"

namespace lanekit::kernels {

namespace {

void splat_max_row_avx2(double* dst, const double* gx, double gy, std::size_t n) {
    const __m256d vgy = _mm256_set1_pd(gy);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_mul_pd(vgy, _mm256_loadu_pd(gx + i));
        __m256d d = _mm256_loadu_pd(dst + i);
        _mm256_storeu_pd(dst + i, _mm256_max_pd(d, v));
    }
    for (; i < n; ++i) {
        double v = gy * gx[i];
        if (v > dst[i]) dst[i] = v;
    }
}

void masked_abs_diff_avx2(const double* pred, const double* target, const double* mask, double scale,
                          double* contrib, double* grad, std::size_t n) {
    const __m256d sign_bit = _mm256_set1_pd(-0.0);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d pscale = _mm256_set1_pd(scale);
    const __m256d nscale = _mm256_set1_pd(-scale);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(pred + i), _mm256_loadu_pd(target + i));
        __m256d active = _mm256_cmp_pd(_mm256_loadu_pd(mask + i), zero, _CMP_NEQ_OQ);
        __m256d ad = _mm256_andnot_pd(sign_bit, d);
        __m256d gt = _mm256_cmp_pd(d, zero, _CMP_GT_OQ);
        __m256d lt = _mm256_cmp_pd(d, zero, _CMP_LT_OQ);
        __m256d g = _mm256_or_pd(_mm256_and_pd(gt, pscale), _mm256_and_pd(lt, nscale));
        _mm256_storeu_pd(contrib + i, _mm256_and_pd(active, ad));
        _mm256_storeu_pd(grad + i, _mm256_and_pd(active, g));
    }
    for (; i < n; ++i) {
        if (mask[i] != 0.0) {
            double d = pred[i] - target[i];
            contrib[i] = std::fabs(d);
            grad[i] = d > 0.0 ? scale : (d < 0.0 ? -scale : 0.0);
        } else {
            contrib[i] = 0.0;
            grad[i] = 0.0;
        }
    }
}

void nearest_center_avx2(const double* vx, const double* vy, std::size_t n, const double* cx, const double* cy,
                         std::size_t m, std::int32_t* best, double* best_d2) {
    std::size_t i = 0;
    if (m > 0) {
        for (; i + 4 <= n; i += 4) {
            __m256d x = _mm256_loadu_pd(vx + i);
            __m256d y = _mm256_loadu_pd(vy + i);
            __m256d bd = _mm256_set1_pd(HUGE_VAL);
            __m256d bi = _mm256_set1_pd(-1.0);
            for (std::size_t j = 0; j < m; ++j) {
                __m256d dx = _mm256_sub_pd(x, _mm256_set1_pd(cx[j]));
                __m256d dy = _mm256_sub_pd(y, _mm256_set1_pd(cy[j]));
                __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
                __m256d better = _mm256_cmp_pd(d2, bd, _CMP_LT_OQ);
                bd = _mm256_blendv_pd(bd, d2, better);
                bi = _mm256_blendv_pd(bi, _mm256_set1_pd(static_cast<double>(j)), better);
            }
            _mm256_storeu_pd(best_d2 + i, bd);
            __m128i idx = _mm256_cvttpd_epi32(bi);
            _mm_storeu_si128(reinterpret_cast<__m128i*>(best + i), idx);
        }
    }
    // remainder (and the m == 0 case) via the scalar reference
    if (i < n) scalar_ops().nearest_center(vx + i, vy + i, n - i, cx, cy, m, best + i, best_d2 + i);
}

void bilinear_accum_avx2(const double* data, std::size_t plane, std::size_t channels, std::size_t o00,
                         std::size_t o10, std::size_t o01, std::size_t o11, double w00, double w10, double w01,
                         double w11, double wgt, double* acc) {
    const __m256d vw00 = _mm256_set1_pd(w00), vw10 = _mm256_set1_pd(w10);
    const __m256d vw01 = _mm256_set1_pd(w01), vw11 = _mm256_set1_pd(w11);
    const __m256d vwgt = _mm256_set1_pd(wgt);
    const long long lp = static_cast<long long>(plane);
    const __m256i step = _mm256_set1_epi64x(4 * lp);
    __m256i cidx = _mm256_set_epi64x(3 * lp, 2 * lp, lp, 0);
    std::size_t c = 0;
    for (; c + 4 <= channels; c += 4) {
        __m256d p00 = _mm256_i64gather_pd(data + o00, cidx, 8);
        __m256d p10 = _mm256_i64gather_pd(data + o10, cidx, 8);
        __m256d p01 = _mm256_i64gather_pd(data + o01, cidx, 8);
        __m256d p11 = _mm256_i64gather_pd(data + o11, cidx, 8);
        __m256d top = _mm256_add_pd(_mm256_mul_pd(vw00, p00), _mm256_mul_pd(vw10, p10));
        __m256d bot = _mm256_add_pd(_mm256_mul_pd(vw01, p01), _mm256_mul_pd(vw11, p11));
        __m256d a = _mm256_loadu_pd(acc + c);
        a = _mm256_add_pd(a, _mm256_mul_pd(vwgt, _mm256_add_pd(top, bot)));
        _mm256_storeu_pd(acc + c, a);
        cidx = _mm256_add_epi64(cidx, step);
    }
    for (; c < channels; ++c) {
        const double* p = data + c * plane;
        double top = w00 * p[o00] + w10 * p[o10];
        double bot = w01 * p[o01] + w11 * p[o11];
        acc[c] += wgt * (top + bot);
    }
}

}  // namespace

const Ops* avx2_ops_impl() {
    static const Ops ops{"avx2", splat_max_row_avx2, masked_abs_diff_avx2, nearest_center_avx2,
                         bilinear_accum_avx2};
    return &ops;
}

}  // namespace lanekit::kernels
