#pragma once

#include <span>
#include <vector>

#include "lanekit/domain.hpp"

namespace lanekit {

/// Published default for the number of sampled adjacent points.
inline constexpr int kDefaultSampleCount = 9;

/// One keypoint's deformable sampling pattern: M offsets around the anchor
/// plus the M convolution weights shared across channels.
struct SampleSet {
    Vec2 anchor;                  // map-cell position p_i
    std::vector<Vec2> offsets;    // M entries, map cells
    std::vector<double> weights;  // M entries
};

struct AggregateGrad {
    Grid d_feature;                 // same shape as the feature grid
    std::vector<Vec2> d_offsets;    // M entries
    std::vector<double> d_weights;  // M entries
};

/// Bilinear interpolation of all channels at a continuous map position.
/// Positions outside the grid are clamped to the border.
std::vector<double> bilinear(const Grid& f, Vec2 pos);

/// Deformable aggregation: sum_m w_m * F(p + dp_m), one value per channel.
std::vector<double> aggregate(const Grid& f, const SampleSet& s);

/// Exact partials of aggregate() contracted with an upstream C-vector.
/// Offset gradients are zero by convention wherever border clamping is
/// active.
AggregateGrad aggregate_grad(const Grid& f, const SampleSet& s, std::span<const double> upstream);

}  // namespace lanekit
