#include <cmath>

#include "lanekit/kernels.hpp"

namespace lanekit::kernels {

namespace {

void splat_max_row_scalar(double* dst, const double* gx, double gy, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double v = gy * gx[i];
        if (v > dst[i]) dst[i] = v;
    }
}

void masked_abs_diff_scalar(const double* pred, const double* target, const double* mask, double scale,
                            double* contrib, double* grad, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
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

void nearest_center_scalar(const double* vx, const double* vy, std::size_t n, const double* cx, const double* cy,
                           std::size_t m, std::int32_t* best, double* best_d2) {
    for (std::size_t i = 0; i < n; ++i) {
        std::int32_t bi = -1;
        double bd = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            double dx = vx[i] - cx[j];
            double dy = vy[i] - cy[j];
            double d2 = dx * dx + dy * dy;
            if (bi < 0 || d2 < bd) {
                bd = d2;
                bi = static_cast<std::int32_t>(j);
            }
        }
        best[i] = bi;
        best_d2[i] = bd;
    }
}

void bilinear_accum_scalar(const double* data, std::size_t plane, std::size_t channels, std::size_t o00,
                           std::size_t o10, std::size_t o01, std::size_t o11, double w00, double w10, double w01,
                           double w11, double wgt, double* acc) {
    for (std::size_t c = 0; c < channels; ++c) {
        const double* p = data + c * plane;
        double top = w00 * p[o00] + w10 * p[o10];
        double bot = w01 * p[o01] + w11 * p[o11];
        acc[c] += wgt * (top + bot);
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{"scalar", splat_max_row_scalar, masked_abs_diff_scalar, nearest_center_scalar,
                         bilinear_accum_scalar};
    return ops;
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace lanekit::kernels
