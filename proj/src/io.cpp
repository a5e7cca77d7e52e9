#include "lanekit/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little, "tensor payloads are little-endian");

namespace lanekit::io {

using nlohmann::json;

std::string to_json(const LaneFile& f) {
    json lanes = json::array();
    for (const Lane& lane : f.lanes) {
        json pts = json::array();
        for (const Keypoint& p : lane.points()) pts.push_back(json::array({p.x, p.y}));
        lanes.push_back(std::move(pts));
    }
    json doc{{"width", f.width}, {"height", f.height}, {"lanes", std::move(lanes)}};
    return doc.dump();
}

LaneFile lane_file_from_json(const std::string& text) {
    json doc = json::parse(text);
    LaneFile f;
    f.width = doc.at("width").get<int>();
    f.height = doc.at("height").get<int>();
    if (f.width <= 0 || f.height <= 0) throw std::invalid_argument("lane file dimensions must be positive");
    for (const json& jl : doc.at("lanes")) {
        std::vector<Keypoint> pts;
        pts.reserve(jl.size());
        for (const json& jp : jl) {
            if (!jp.is_array() || jp.size() != 2) throw std::invalid_argument("lane point must be an [x, y] pair");
            pts.push_back({jp[0].get<double>(), jp[1].get<double>()});
        }
        f.lanes.push_back(Lane::from_points(std::move(pts)));
    }
    validate_in_bounds(f.lanes, f.width, f.height);
    return f;
}

void write_lane_file(const std::filesystem::path& path, const LaneFile& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << to_json(f) << "\n";
}

LaneFile read_lane_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return lane_file_from_json(buf.str());
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
    std::size_t count = t.channels;
    for (int d : t.dims) count *= static_cast<std::size_t>(d);
    if (count != t.values.size()) throw std::invalid_argument("tensor value count does not match dims x channels");

    json header{{"name", t.name}, {"dims", t.dims}, {"channels", t.channels}, {"stride", t.stride},
                {"units", t.units}, {"dtype", "f32le"}};
    std::vector<float> payload(t.values.size());
    for (std::size_t i = 0; i < t.values.size(); ++i) payload[i] = static_cast<float>(t.values[i]);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << header.dump() << "\n" << payload.size() * sizeof(float) << "\n";
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string header_line, length_line;
    if (!std::getline(in, header_line) || !std::getline(in, length_line))
        throw std::runtime_error(path.string() + ": truncated tensor header");

    json header = json::parse(header_line);
    Tensor t;
    t.name = header.at("name").get<std::string>();
    t.dims = header.at("dims").get<std::vector<int>>();
    t.channels = header.at("channels").get<int>();
    t.stride = header.at("stride").get<int>();
    t.units = header.at("units").get<std::string>();
    if (header.at("dtype").get<std::string>() != "f32le")
        throw std::runtime_error(path.string() + ": unsupported dtype");

    std::size_t expect = t.channels;
    for (int d : t.dims) {
        if (d < 0) throw std::runtime_error(path.string() + ": negative dimension");
        expect *= static_cast<std::size_t>(d);
    }
    const std::size_t bytes = std::stoull(length_line);
    if (bytes != expect * sizeof(float)) throw std::runtime_error(path.string() + ": payload length mismatch");

    std::vector<float> payload(expect);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in.gcount()) != bytes) throw std::runtime_error(path.string() + ": short payload");

    t.values.resize(expect);
    for (std::size_t i = 0; i < expect; ++i) {
        if (!std::isfinite(payload[i])) throw std::runtime_error(path.string() + ": non-finite tensor value");
        t.values[i] = payload[i];
    }
    return t;
}

Tensor tensor_from_grid(const Grid& g, const std::string& name, const std::string& units) {
    Tensor t;
    t.name = name;
    t.dims = {g.height(), g.width()};
    t.channels = g.channels();
    t.stride = g.spec().stride;
    t.units = units;
    t.values = g.data();
    return t;
}

Grid grid_from_tensor(const Tensor& t) {
    if (t.dims.size() != 2) throw std::runtime_error("grid tensor must have dims [H', W']");
    GridSpec spec(t.dims[0] * t.stride, t.dims[1] * t.stride, t.stride);
    Grid g(spec, t.channels);
    g.data() = t.values;
    return g;
}

void write_targets(const std::filesystem::path& dir, const Targets& t) {
    std::filesystem::create_directories(dir);
    write_tensor(dir / "confidence.t32", tensor_from_grid(t.confidence, "confidence", "probability"));
    write_tensor(dir / "quant.t32", tensor_from_grid(t.quant, "quant", "cells"));
    write_tensor(dir / "offsets.t32", tensor_from_grid(t.offsets, "offsets", "cells"));
    write_tensor(dir / "mask.t32", tensor_from_grid(t.mask, "mask", "indicator"));

    Tensor adj;
    adj.name = "adjacency";
    adj.stride = t.confidence.spec().stride;
    adj.units = "cells";
    adj.channels = 2;
    const int nk = static_cast<int>(t.adjacency.size());
    const int k = nk > 0 ? static_cast<int>(t.adjacency.front().offsets.size()) : 0;
    adj.dims = {nk, k};
    adj.values.assign(static_cast<std::size_t>(2) * nk * k, 0.0);
    const std::size_t plane = static_cast<std::size_t>(nk) * k;
    for (int i = 0; i < nk; ++i)
        for (int j = 0; j < k; ++j) {
            adj.values[static_cast<std::size_t>(i) * k + j] = t.adjacency[i].offsets[j].x;
            adj.values[plane + static_cast<std::size_t>(i) * k + j] = t.adjacency[i].offsets[j].y;
        }
    write_tensor(dir / "adjacency.t32", adj);
}

Targets read_targets(const std::filesystem::path& dir) {
    Targets t;
    t.confidence = grid_from_tensor(read_tensor(dir / "confidence.t32"));
    t.quant = grid_from_tensor(read_tensor(dir / "quant.t32"));
    t.offsets = grid_from_tensor(read_tensor(dir / "offsets.t32"));
    t.mask = grid_from_tensor(read_tensor(dir / "mask.t32"));
    if (!(t.confidence.spec() == t.quant.spec()) || !(t.confidence.spec() == t.offsets.spec()) ||
        !(t.confidence.spec() == t.mask.spec()))
        throw std::runtime_error(dir.string() + ": target tensors disagree on the grid spec");

    Tensor adj = read_tensor(dir / "adjacency.t32");
    if (adj.dims.size() != 2 || adj.channels != 2)
        throw std::runtime_error(dir.string() + ": adjacency tensor must be [NK, K] with 2 channels");
    const int nk = adj.dims[0];
    const int k = adj.dims[1];
    if (nk > 0 && k < 1) throw std::runtime_error(dir.string() + ": adjacency entries need at least one offset");
    const std::size_t plane = static_cast<std::size_t>(nk) * k;
    t.adjacency.reserve(nk);
    for (int i = 0; i < nk; ++i) {
        KeypointAdjacency a;
        a.lane = i / k;
        a.index = i % k;
        a.offsets.resize(k);
        for (int j = 0; j < k; ++j) {
            a.offsets[j].x = adj.values[static_cast<std::size_t>(i) * k + j];
            a.offsets[j].y = adj.values[plane + static_cast<std::size_t>(i) * k + j];
        }
        t.adjacency.push_back(std::move(a));
    }
    return t;
}

}  // namespace lanekit::io
