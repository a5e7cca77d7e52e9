#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lanekit/domain.hpp"

namespace lanekit {

struct CulaneConfig {
    double iou_threshold = 0.5;
    int lane_width = 30;  // rasterization stroke width, pixels
};

struct TusimpleConfig {
    double pixel_tolerance = 20.0;
    double lane_accuracy_threshold = 0.85;
    std::vector<int> eval_rows;  // empty -> every 10 px over the image height
};

struct EvalReport {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::optional<double> accuracy;  // TuSimple only
    long gt_points = 0;              // TuSimple row points, for corpus aggregation
    long correct_points = 0;
};

/// Binary stroke mask of a lane polyline, one bit per pixel.
class LaneMask {
   public:
    LaneMask(int width, int height);
    void stamp_disc_run(int x, int y, int half_width);
    std::size_t count() const;
    static std::size_t intersection(const LaneMask& a, const LaneMask& b);
    static std::size_t union_count(const LaneMask& a, const LaneMask& b);

   private:
    int width_;
    int height_;
    int words_per_row_;
    std::vector<std::uint64_t> bits_;
};

/// Rasterizes a lane as a supercover polyline dilated to cfg.lane_width.
LaneMask rasterize_lane(const Lane& lane, int width, int height, int lane_width);

/// Pairwise IoU over stroked masks, optimal matching (cost 1 - IoU), pairs
/// with IoU strictly above the threshold count as true positives.
EvalReport culane_f1(const LaneSet& pred, const LaneSet& gt, int width, int height, const CulaneConfig& cfg);

/// Row-wise point accuracy: a ground-truth row point is correct when the
/// matched predicted lane's x at that row is strictly within the pixel
/// tolerance; lanes with accuracy above the threshold are true positives.
EvalReport tusimple_accuracy(const LaneSet& pred, const LaneSet& gt, int width, int height,
                             const TusimpleConfig& cfg);

void finalize_counts(EvalReport& r);  // fills precision/recall/f1 from tp/fp/fn

}  // namespace lanekit
