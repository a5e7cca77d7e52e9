#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

namespace lanekit::kernels {

// Data-parallel inner loops, provided as a scalar reference and (when the CPU
// supports it) an AVX2 variant. Both variants perform the same elementwise
// operations in the same order, so results are bit-identical; the whole
// project is built with -ffp-contract=off to keep the scalar code from
// contracting mul+add into fma.
struct Ops {
    const char* name;

    // dst[i] = max(dst[i], gy * gx[i])
    void (*splat_max_row)(double* dst, const double* gx, double gy, std::size_t n);

    // Elementwise masked absolute difference:
    //   contrib[i] = mask[i] != 0 ? |pred[i] - target[i]| : 0
    //   grad[i]    = mask[i] != 0 ? sign(pred[i] - target[i]) * scale : 0
    void (*masked_abs_diff)(const double* pred, const double* target, const double* mask, double scale,
                            double* contrib, double* grad, std::size_t n);

    // For each vote i, the index of the nearest center (squared Euclidean
    // distance, ties to the smallest index) and that squared distance.
    void (*nearest_center)(const double* vx, const double* vy, std::size_t n, const double* cx, const double* cy,
                           std::size_t m, std::int32_t* best, double* best_d2);

    // acc[c] += wgt * (w00*p00[c] + w10*p10[c] + (w01*p01[c] + w11*p11[c]))
    // where pXY[c] = data[c*plane + oXY]; the four corner offsets and weights
    // come from one bilinear tap shared by all channels.
    void (*bilinear_accum)(const double* data, std::size_t plane, std::size_t channels, std::size_t o00,
                           std::size_t o10, std::size_t o01, std::size_t o11, double w00, double w10, double w01,
                           double w11, double wgt, double* acc);
};

enum class Backend { Auto, Scalar, Avx2 };

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when not compiled in or not supported by the CPU

/// The active backend. Honors the LANEKIT_KERNELS environment variable
/// ("scalar", "avx2", "auto") on first use.
const Ops& ops();

void set_backend(Backend b);  // throws if the backend is unavailable
std::string backend_name();

/// Deterministic fixed-order pairwise reduction, independent of backend.
double pairwise_sum(std::span<const double> values);

}  // namespace lanekit::kernels
