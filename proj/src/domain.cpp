#include "lanekit/domain.hpp"

#include <cmath>
#include <string>

namespace lanekit {

GridSpec::GridSpec(int height, int width, int r) {
    if (r < 1) throw std::invalid_argument("stride must be >= 1");
    if (height <= 0 || width <= 0) throw std::invalid_argument("image dimensions must be positive");
    if (height % r != 0 || width % r != 0)
        throw std::invalid_argument("image dimensions must be exact multiples of the stride");
    height_in = height;
    width_in = width;
    stride = r;
    height_out = height / r;
    width_out = width / r;
}

Lane Lane::from_points(std::vector<Keypoint> points) {
    if (points.size() < 2) throw std::invalid_argument("lane needs at least 2 points");
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i].y < points[i - 1].y))
            throw std::invalid_argument("lane y-coordinates must decrease strictly from the starting point");
        if (points[i] == points[i - 1]) throw std::invalid_argument("consecutive lane points coincide");
    }
    Lane lane;
    lane.points_ = std::move(points);
    return lane;
}

void validate_in_bounds(const LaneSet& lanes, int width, int height) {
    for (const Lane& lane : lanes) {
        for (const Keypoint& p : lane.points()) {
            if (!(p.x >= 0.0 && p.x < width && p.y >= 0.0 && p.y < height))
                throw std::domain_error("lane point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                        ") outside image bounds");
        }
    }
}

MapCoords to_map_coords(const Keypoint& p, const GridSpec& spec) {
    if (!(p.x >= 0.0 && p.x < spec.width_in && p.y >= 0.0 && p.y < spec.height_in))
        throw std::domain_error("point outside image bounds");
    MapCoords m;
    m.mx = p.x / spec.stride;
    m.my = p.y / spec.stride;
    m.ix = static_cast<int>(std::floor(m.mx));
    m.iy = static_cast<int>(std::floor(m.my));
    m.qx = m.mx - m.ix;
    m.qy = m.my - m.iy;
    return m;
}

}  // namespace lanekit
