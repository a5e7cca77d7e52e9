#pragma once

#include <vector>

#include "lanekit/domain.hpp"

namespace lanekit {

enum class AssocMode { Sequential, Simd, Threaded };

struct DecoderConfig {
    double keypoint_threshold = 0.4;
    double theta_dis = 4.0;      // map cells
    int nms_width = 3;           // horizontal window, odd
    double start_norm_limit = 1.0;
    AssocMode mode = AssocMode::Sequential;
    unsigned threads = 4;        // Threaded mode only
};

/// A surviving confidence peak, refined by the quantization map.
struct ScoredKeypoint {
    double x = 0.0;  // continuous map coords
    double y = 0.0;
    int cx = 0;  // source cell
    int cy = 0;
    double confidence = 0.0;
};

struct StartCenter {
    double x = 0.0;
    double y = 0.0;
    int members = 0;
};

struct DecodedLane {
    std::vector<Keypoint> points;       // image coords, bottom-to-top
    std::vector<double> confidences;    // per point
    std::vector<double> residuals;      // vote-to-center distance, map cells
    StartCenter center;                 // map coords
};

struct DecodedLaneSet {
    std::vector<DecodedLane> lanes;
    GridSpec spec;
};

/// Thresholds the confidence map, keeps horizontal-window maxima (ties to the
/// leftmost cell) and refines surviving cells with the quantization map.
std::vector<ScoredKeypoint> select_keypoints(const Grid& conf, const Grid& quant, const DecoderConfig& cfg);

/// Starting-point cluster centers: keypoints whose offset norm is below the
/// limit, grouped by theta_dis connectivity, one arithmetic-mean center per
/// group, sorted by (x, y).
std::vector<StartCenter> find_starting_points(const Grid& offsets, const std::vector<ScoredKeypoint>& valid,
                                              const DecoderConfig& cfg);

/// Votes every keypoint toward its starting point and joins it to the nearest
/// center when the vote lands strictly within theta_dis. Independent per
/// keypoint; all modes produce identical results.
DecodedLaneSet associate(const std::vector<ScoredKeypoint>& valid, const Grid& offsets,
                         const std::vector<StartCenter>& centers, const DecoderConfig& cfg);

/// Full pipeline: select -> find starting points -> associate.
DecodedLaneSet decode(const Grid& conf, const Grid& quant, const Grid& offsets, const DecoderConfig& cfg);

}  // namespace lanekit
