#include "lanekit/encoder.hpp"

#include <cmath>
#include <stdexcept>

#include "lanekit/kernels.hpp"

namespace lanekit {

namespace {

// x on the polyline at height y, walking segments from the bottom end.
double interp_x(const Lane& polyline, double y) {
    const auto& pts = polyline.points();
    if (y >= pts.front().y) return pts.front().x;
    if (y <= pts.back().y) return pts.back().x;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (y >= pts[i].y) {
            double t = (pts[i - 1].y - y) / (pts[i - 1].y - pts[i].y);
            return pts[i - 1].x + t * (pts[i].x - pts[i - 1].x);
        }
    }
    return pts.back().x;
}

}  // namespace

Lane sample_lane(const Lane& polyline, int k) {
    if (k < 2) throw std::invalid_argument("points_per_lane must be >= 2");
    double y_bottom = polyline.points().front().y;
    double y_top = polyline.points().back().y;
    if (!(y_bottom > y_top)) throw std::invalid_argument("degenerate lane: no vertical extent");
    std::vector<Keypoint> out;
    out.reserve(k);
    for (int j = 0; j < k; ++j) {
        double y = y_bottom + (y_top - y_bottom) * j / (k - 1);
        out.push_back({interp_x(polyline, y), y});
    }
    return Lane::from_points(std::move(out));
}

Targets encode(const LaneSet& lanes, const GridSpec& spec, const EncoderConfig& cfg) {
    if (!(cfg.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    validate_in_bounds(lanes, spec.width_in, spec.height_in);

    Targets t;
    t.confidence = Grid(spec, 1);
    t.quant = Grid(spec, 2);
    t.offsets = Grid(spec, 2);
    t.mask = Grid(spec, 1);
    t.sampled.reserve(lanes.size());
    for (const Lane& lane : lanes) t.sampled.push_back(sample_lane(lane, cfg.points_per_lane));

    const int h = spec.height_out;
    const int w = spec.width_out;
    const double inv_two_sigma_sq = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
    const auto& ops = kernels::ops();
    std::vector<double> gx(w), gy(h);

    for (std::size_t li = 0; li < t.sampled.size(); ++li) {
        const Lane& lane = t.sampled[li];
        const Keypoint& start = lane.starting_point();
        for (std::size_t j = 0; j < lane.size(); ++j) {
            MapCoords m = to_map_coords(lane[j], spec);

            // Gaussian splat centered on the quantized cell, element-wise max
            // against whatever previous keypoints deposited. The kernel is
            // separable, so each row update is a 1D multiply-max.
            for (int x = 0; x < w; ++x) gx[x] = std::exp(-static_cast<double>((x - m.ix) * (x - m.ix)) * inv_two_sigma_sq);
            for (int y = 0; y < h; ++y) gy[y] = std::exp(-static_cast<double>((y - m.iy) * (y - m.iy)) * inv_two_sigma_sq);
            for (int y = 0; y < h; ++y) ops.splat_max_row(t.confidence.row(0, y).data(), gx.data(), gy[y], w);

            // First claimant (smallest lane index, then point index) keeps the
            // per-cell regression targets when two keypoints share a cell.
            if (t.mask.at(0, m.iy, m.ix) == 0.0) {
                t.mask.at(0, m.iy, m.ix) = 1.0;
                t.quant.at(0, m.iy, m.ix) = m.qx;
                t.quant.at(1, m.iy, m.ix) = m.qy;
                t.offsets.at(0, m.iy, m.ix) = (start.x - lane[j].x) / spec.stride;
                t.offsets.at(1, m.iy, m.ix) = (start.y - lane[j].y) / spec.stride;
            }

            KeypointAdjacency adj;
            adj.lane = static_cast<int>(li);
            adj.index = static_cast<int>(j);
            adj.anchor = {m.mx, m.my};
            adj.offsets.reserve(lane.size());
            for (std::size_t kk = 0; kk < lane.size(); ++kk)
                adj.offsets.push_back({(lane[kk].x - lane[j].x) / spec.stride, (lane[kk].y - lane[j].y) / spec.stride});
            t.adjacency.push_back(std::move(adj));
        }
    }
    return t;
}

}  // namespace lanekit
