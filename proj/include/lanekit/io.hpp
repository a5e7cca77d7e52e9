#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lanekit/domain.hpp"
#include "lanekit/encoder.hpp"

namespace lanekit::io {

/// Lane JSON document: {"width": W, "height": H, "lanes": [[[x,y],...],...]},
/// coordinates in image space, each lane listed bottom-to-top.
struct LaneFile {
    int width = 0;
    int height = 0;
    LaneSet lanes;
};

std::string to_json(const LaneFile& f);
LaneFile lane_file_from_json(const std::string& text);
void write_lane_file(const std::filesystem::path& path, const LaneFile& f);
LaneFile read_lane_file(const std::filesystem::path& path);

/// Portable tensor container: one-line JSON header, a decimal payload byte
/// count on the next line, then raw row-major IEEE-754 32-bit little-endian
/// values.
struct Tensor {
    std::string name;
    std::vector<int> dims;  // payload length = prod(dims) * channels
    int channels = 1;
    int stride = 1;
    std::string units;
    std::vector<double> values;  // converted to/from f32 at the file boundary
};

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

Tensor tensor_from_grid(const Grid& g, const std::string& name, const std::string& units);
Grid grid_from_tensor(const Tensor& t);

/// The five target tensors emitted by `encode` (confidence, quant, offsets,
/// mask, adjacency) under conventional file names in a directory.
void write_targets(const std::filesystem::path& dir, const Targets& t);

/// Rebuilds Targets from a directory written by write_targets. The sampled
/// lanes and adjacency anchors are not stored in the files and come back
/// empty/zeroed; the loss paths do not need them.
Targets read_targets(const std::filesystem::path& dir);

}  // namespace lanekit::io
