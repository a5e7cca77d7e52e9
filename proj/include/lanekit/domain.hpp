#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace lanekit {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline bool operator==(const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }

/// Maps between input-image pixels and the downscaled map grid.
struct GridSpec {
    int height_in = 0;   // H, pixels
    int width_in = 0;    // W, pixels
    int stride = 1;      // r
    int height_out = 0;  // H' = H / r
    int width_out = 0;   // W' = W / r

    GridSpec() = default;
    GridSpec(int height, int width, int r);

    std::size_t cells() const { return static_cast<std::size_t>(height_out) * width_out; }
};

inline bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.height_in == b.height_in && a.width_in == b.width_in && a.stride == b.stride;
}

/// A 2D point in continuous image coordinates (origin top-left, y downward).
struct Keypoint {
    double x = 0.0;
    double y = 0.0;
};

inline bool operator==(const Keypoint& a, const Keypoint& b) { return a.x == b.x && a.y == b.y; }

/// Ordered keypoint polyline, bottom-to-top: points[0] is the starting point
/// (largest y) and y decreases strictly along the sequence.
class Lane {
   public:
    Lane() = default;
    static Lane from_points(std::vector<Keypoint> points);

    const std::vector<Keypoint>& points() const { return points_; }
    const Keypoint& starting_point() const { return points_.front(); }
    std::size_t size() const { return points_.size(); }
    const Keypoint& operator[](std::size_t i) const { return points_[i]; }

   private:
    std::vector<Keypoint> points_;
};

using LaneSet = std::vector<Lane>;

/// Checks that every point of every lane lies inside [0,W) x [0,H).
void validate_in_bounds(const LaneSet& lanes, int width, int height);

/// Dense map-resolution tensor, channel-major row-major storage.
class Grid {
   public:
    Grid() = default;
    Grid(const GridSpec& spec, int channels)
        : spec_(spec), channels_(channels), data_(spec.cells() * channels, 0.0) {}

    const GridSpec& spec() const { return spec_; }
    int channels() const { return channels_; }
    int height() const { return spec_.height_out; }
    int width() const { return spec_.width_out; }

    double& at(int c, int y, int x) { return data_[index(c, y, x)]; }
    double at(int c, int y, int x) const { return data_[index(c, y, x)]; }

    std::span<double> channel(int c) {
        return std::span<double>(data_).subspan(static_cast<std::size_t>(c) * spec_.cells(), spec_.cells());
    }
    std::span<const double> channel(int c) const {
        return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * spec_.cells(), spec_.cells());
    }
    std::span<double> row(int c, int y) { return channel(c).subspan(static_cast<std::size_t>(y) * width(), width()); }
    std::span<const double> row(int c, int y) const {
        return channel(c).subspan(static_cast<std::size_t>(y) * width(), width());
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Grid& other) const {
        return spec_ == other.spec_ && channels_ == other.channels_;
    }

   private:
    std::size_t index(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * spec_.height_out + y) * spec_.width_out + x;
    }

    GridSpec spec_;
    int channels_ = 0;
    std::vector<double> data_;
};

inline bool operator==(const Grid& a, const Grid& b) {
    return a.same_shape(b) && a.data() == b.data();
}

struct MapCoords {
    double mx = 0.0;  // x / r
    double my = 0.0;
    int ix = 0;  // floor(mx)
    int iy = 0;
    double qx = 0.0;  // mx - ix, in [0, 1)
    double qy = 0.0;
};

/// Maps an image-space point to map-cell coordinates. Throws std::domain_error
/// when the point lies outside the image.
MapCoords to_map_coords(const Keypoint& p, const GridSpec& spec);

}  // namespace lanekit
