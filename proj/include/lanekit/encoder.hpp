#pragma once

#include <vector>

#include "lanekit/domain.hpp"

namespace lanekit {

struct EncoderConfig {
    double sigma = 0.5;       // Gaussian std-dev in map cells; see README for the decodability bound
    int points_per_lane = 10;  // K
    int stride = 8;            // r
};

/// Ground-truth adjacency for one sampled keypoint: the offsets (map cells)
/// from this keypoint to every keypoint of its own lane, itself included.
struct KeypointAdjacency {
    int lane = 0;
    int index = 0;       // position within the lane, 0 = starting point
    Vec2 anchor;         // continuous map-cell position of the keypoint
    std::vector<Vec2> offsets;  // K entries
};

struct Targets {
    Grid confidence;  // 1 channel, in [0,1], exactly 1 at keypoint cells
    Grid quant;       // 2 channels (qx, qy), nonzero on masked cells only
    Grid offsets;     // 2 channels, map cells, keypoint -> starting point
    Grid mask;        // 1 channel, {0,1}
    std::vector<KeypointAdjacency> adjacency;  // N*K entries, lane-major
    std::vector<Lane> sampled;                 // the K-point lanes the targets encode
};

/// Resamples a polyline to k points at evenly spaced y-values from the
/// bottom-most to the top-most point, interpolating x linearly.
Lane sample_lane(const Lane& polyline, int k);

/// Builds all supervision targets for a lane set.
Targets encode(const LaneSet& lanes, const GridSpec& spec, const EncoderConfig& cfg);

}  // namespace lanekit
