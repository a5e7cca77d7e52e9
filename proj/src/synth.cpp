#include "lanekit/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lanekit {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal(double stddev) {
    // Box-Muller; draws two uniforms per sample for a fixed consumption rate.
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

double LaneModel::x_at(double y) const {
    const double t = (y_bottom - y) / (y_bottom - y_top);
    return start_x + slope * t + curve * t * t + cubic * t * t * t;
}

Scene generate(const SceneSpec& spec) {
    if (spec.n_lanes < 0) throw std::invalid_argument("n_lanes must be nonnegative");
    if (spec.width <= 0 || spec.height <= 0) throw std::invalid_argument("scene dimensions must be positive");

    Scene scene;
    scene.width = spec.width;
    scene.height = spec.height;
    if (spec.n_lanes == 0) return scene;

    const double usable = spec.width - 2.0 * spec.edge_margin;
    const double slot = usable / spec.n_lanes;
    if (slot < spec.min_start_sep)
        throw std::invalid_argument("infeasible starting-point spacing for the requested lane count");

    Rng rng(spec.seed);
    // Lateral budget keeps each lane inside its own slot so lane-to-lane gaps
    // stay at ~0.3 * slot and nothing leaves [margin, width - margin].
    const double dev = 0.35 * slot;
    const double jitter =
        std::max(0.0, std::min(0.5 * (slot - spec.min_start_sep), 0.5 * slot - dev - 1.0));

    for (int i = 0; i < spec.n_lanes; ++i) {
        LaneModel m;
        m.start_x = spec.edge_margin + slot * (i + 0.5) + (jitter > 0.0 ? rng.uniform(-jitter, jitter) : 0.0);
        m.y_bottom = spec.height - 1 - rng.uniform(0.0, 6.0);
        const double span = rng.uniform(spec.span_min, spec.span_max) * spec.height;
        m.y_top = std::max(2.0, m.y_bottom - span);

        double budget = dev;
        if (spec.family != LaneFamily::Straight || spec.slope_scale > 0.0) {
            m.slope = rng.uniform(-1.0, 1.0) * spec.slope_scale * budget;
            budget -= std::fabs(m.slope);
        }
        if (spec.family == LaneFamily::Quadratic || spec.family == LaneFamily::Cubic) {
            m.curve = rng.uniform(-1.0, 1.0) * spec.curve_scale * budget;
            budget -= std::fabs(m.curve);
        }
        if (spec.family == LaneFamily::Cubic) m.cubic = rng.uniform(-1.0, 1.0) * budget;

        std::vector<Keypoint> pts;
        for (double y = m.y_bottom; y > m.y_top; y -= spec.polyline_step) pts.push_back({m.x_at(y), y});
        pts.push_back({m.x_at(m.y_top), m.y_top});
        scene.lanes.push_back(Lane::from_points(std::move(pts)));
        scene.models.push_back(m);
    }
    validate_in_bounds(scene.lanes, spec.width, spec.height);
    return scene;
}

Targets corrupt(const Targets& t, const Corruption& c, std::uint64_t seed) {
    Targets out = t;
    Rng rng(seed);
    const int h = t.confidence.height();
    const int w = t.confidence.width();

    if (c.confidence_noise > 0.0) {
        for (double& v : out.confidence.data()) v = std::clamp(v + rng.normal(c.confidence_noise), 0.0, 1.0);
    }
    if (c.offset_noise > 0.0) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (out.mask.at(0, y, x) != 0.0) {
                    out.offsets.at(0, y, x) += rng.normal(c.offset_noise);
                    out.offsets.at(1, y, x) += rng.normal(c.offset_noise);
                }
    }
    if (c.dropout > 0.0) {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (out.mask.at(0, y, x) != 0.0 && rng.bernoulli(c.dropout)) {
                    out.mask.at(0, y, x) = 0.0;
                    out.quant.at(0, y, x) = 0.0;
                    out.quant.at(1, y, x) = 0.0;
                    out.offsets.at(0, y, x) = 0.0;
                    out.offsets.at(1, y, x) = 0.0;
                    out.confidence.at(0, y, x) = 0.0;
                }
    }
    if (c.false_peak_rate > 0.0) {
        int n = static_cast<int>(std::floor(c.false_peak_rate));
        if (rng.bernoulli(c.false_peak_rate - n)) ++n;
        for (int i = 0; i < n; ++i) {
            const int x = static_cast<int>(rng.uniform(0.0, w));
            const int y = static_cast<int>(rng.uniform(0.0, h));
            const double v = rng.uniform(0.6, 1.0);
            if (out.mask.at(0, y, x) == 0.0 && out.confidence.at(0, y, x) < v) out.confidence.at(0, y, x) = v;
        }
    }
    return out;
}

}  // namespace lanekit
