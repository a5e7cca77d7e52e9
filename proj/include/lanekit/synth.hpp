#pragma once

#include <cstdint>
#include <vector>

#include "lanekit/domain.hpp"
#include "lanekit/encoder.hpp"

namespace lanekit {

/// xoshiro256** seeded through splitmix64: portable, published constants,
/// bit-identical streams everywhere.
class Rng {
   public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next_u64();
    double uniform();                        // [0, 1)
    double uniform(double lo, double hi);    // [lo, hi)
    double normal(double stddev);            // Box-Muller
    bool bernoulli(double p);

   private:
    std::uint64_t s_[4];
};

enum class LaneFamily { Straight, Quadratic, Cubic };

struct SceneSpec {
    int width = 800;
    int height = 320;
    int n_lanes = 4;
    LaneFamily family = LaneFamily::Quadratic;
    double min_start_sep = 64.0;   // pixels between starting-point x positions
    double edge_margin = 25.0;     // lanes stay this far from the left/right borders
    double slope_scale = 0.6;      // fraction of the per-lane lateral budget spent on slope
    double curve_scale = 0.9;      // fraction of the remaining budget spent on curvature
    double span_min = 0.55;        // lane vertical extent as a fraction of height
    double span_max = 0.85;
    double polyline_step = 2.0;    // y sampling step of the emitted polyline, pixels
    std::uint64_t seed = 1;
};

/// Analytic lane x(y) = start_x + slope * t + curve * t^2 + cubic * t^3 with
/// t = (y_bottom - y) / (y_bottom - y_top).
struct LaneModel {
    double start_x = 0.0;
    double y_bottom = 0.0;
    double y_top = 0.0;
    double slope = 0.0;
    double curve = 0.0;
    double cubic = 0.0;
    double x_at(double y) const;
};

struct Scene {
    int width = 0;
    int height = 0;
    LaneSet lanes;
    std::vector<LaneModel> models;
};

/// Deterministic synthetic scene. Throws when n_lanes starting points cannot
/// be spaced min_start_sep apart within the usable width.
Scene generate(const SceneSpec& spec);

struct Corruption {
    double confidence_noise = 0.0;  // additive Gaussian, clamped to [0,1]
    double offset_noise = 0.0;      // additive Gaussian on masked offsets, map cells
    double dropout = 0.0;           // per-keypoint-cell drop probability
    double false_peak_rate = 0.0;   // expected spurious peaks per scene
};

/// Applies seeded corruption to a copy of the targets.
Targets corrupt(const Targets& t, const Corruption& c, std::uint64_t seed);

}  // namespace lanekit
