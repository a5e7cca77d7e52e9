#include "lanekit/lfa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lanekit/kernels.hpp"

namespace lanekit {

namespace {

struct Tap {
    std::size_t o00, o10, o01, o11;  // corner offsets within a channel plane
    double w00, w10, w01, w11;       // bilinear corner weights
    double fx, fy;                   // fractional parts after clamping
    int x0, y0;
    bool clamped_x, clamped_y;
};

Tap make_tap(const Grid& f, Vec2 pos) {
    const int w = f.width();
    const int h = f.height();
    Tap t{};
    double x = pos.x;
    double y = pos.y;
    t.clamped_x = x <= 0.0 || x >= w - 1;
    t.clamped_y = y <= 0.0 || y >= h - 1;
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    t.x0 = std::min(static_cast<int>(std::floor(x)), w - 2 >= 0 ? w - 2 : 0);
    t.y0 = std::min(static_cast<int>(std::floor(y)), h - 2 >= 0 ? h - 2 : 0);
    t.fx = x - t.x0;
    t.fy = y - t.y0;
    const int x1 = std::min(t.x0 + 1, w - 1);
    const int y1 = std::min(t.y0 + 1, h - 1);
    t.o00 = static_cast<std::size_t>(t.y0) * w + t.x0;
    t.o10 = static_cast<std::size_t>(t.y0) * w + x1;
    t.o01 = static_cast<std::size_t>(y1) * w + t.x0;
    t.o11 = static_cast<std::size_t>(y1) * w + x1;
    t.w00 = (1.0 - t.fx) * (1.0 - t.fy);
    t.w10 = t.fx * (1.0 - t.fy);
    t.w01 = (1.0 - t.fx) * t.fy;
    t.w11 = t.fx * t.fy;
    return t;
}

void check_sample_set(const SampleSet& s) {
    if (s.offsets.empty()) throw std::invalid_argument("sample set needs at least one offset");
    if (s.offsets.size() != s.weights.size())
        throw std::invalid_argument("sample set offsets and weights must have the same length");
}

}  // namespace

std::vector<double> bilinear(const Grid& f, Vec2 pos) {
    std::vector<double> out(f.channels(), 0.0);
    Tap t = make_tap(f, pos);
    kernels::ops().bilinear_accum(f.data().data(), f.spec().cells(), f.channels(), t.o00, t.o10, t.o01, t.o11,
                                  t.w00, t.w10, t.w01, t.w11, 1.0, out.data());
    return out;
}

std::vector<double> aggregate(const Grid& f, const SampleSet& s) {
    check_sample_set(s);
    std::vector<double> out(f.channels(), 0.0);
    const auto& ops = kernels::ops();
    for (std::size_t m = 0; m < s.offsets.size(); ++m) {
        Tap t = make_tap(f, {s.anchor.x + s.offsets[m].x, s.anchor.y + s.offsets[m].y});
        ops.bilinear_accum(f.data().data(), f.spec().cells(), f.channels(), t.o00, t.o10, t.o01, t.o11, t.w00,
                           t.w10, t.w01, t.w11, s.weights[m], out.data());
    }
    return out;
}

AggregateGrad aggregate_grad(const Grid& f, const SampleSet& s, std::span<const double> upstream) {
    check_sample_set(s);
    if (static_cast<int>(upstream.size()) != f.channels())
        throw std::invalid_argument("upstream size must match the channel count");

    AggregateGrad g;
    g.d_feature = Grid(f.spec(), f.channels());
    g.d_offsets.assign(s.offsets.size(), Vec2{0.0, 0.0});
    g.d_weights.assign(s.weights.size(), 0.0);

    for (std::size_t m = 0; m < s.offsets.size(); ++m) {
        Tap t = make_tap(f, {s.anchor.x + s.offsets[m].x, s.anchor.y + s.offsets[m].y});
        const double wm = s.weights[m];
        double dx_dot = 0.0, dy_dot = 0.0;
        for (int c = 0; c < f.channels(); ++c) {
            auto plane = f.channel(c);
            const double v00 = plane[t.o00], v10 = plane[t.o10];
            const double v01 = plane[t.o01], v11 = plane[t.o11];
            const double val = (t.w00 * v00 + t.w10 * v10) + (t.w01 * v01 + t.w11 * v11);
            g.d_weights[m] += val * upstream[c];

            auto dplane = g.d_feature.channel(c);
            const double up = wm * upstream[c];
            dplane[t.o00] += up * t.w00;
            dplane[t.o10] += up * t.w10;
            dplane[t.o01] += up * t.w01;
            dplane[t.o11] += up * t.w11;

            // piecewise-bilinear position derivatives: corner differences
            dx_dot += ((1.0 - t.fy) * (v10 - v00) + t.fy * (v11 - v01)) * upstream[c];
            dy_dot += ((1.0 - t.fx) * (v01 - v00) + t.fx * (v11 - v10)) * upstream[c];
        }
        g.d_offsets[m].x = t.clamped_x ? 0.0 : wm * dx_dot;
        g.d_offsets[m].y = t.clamped_y ? 0.0 : wm * dy_dot;
    }
    return g;
}

}  // namespace lanekit
