#include "lanekit/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "lanekit/kernels.hpp"

namespace lanekit {

namespace {

void check_spec(const Grid& a, const Grid& b) {
    if (!(a.spec() == b.spec())) throw std::invalid_argument("decoder grids must share a spec");
}

struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<ScoredKeypoint> select_keypoints(const Grid& conf, const Grid& quant, const DecoderConfig& cfg) {
    check_spec(conf, quant);
    if (cfg.nms_width < 1 || cfg.nms_width % 2 == 0)
        throw std::invalid_argument("nms_width must be odd and positive");
    const int half = cfg.nms_width / 2;
    const int h = conf.height();
    const int w = conf.width();

    std::vector<ScoredKeypoint> out;
    for (int y = 0; y < h; ++y) {
        auto row = conf.row(0, y);
        for (int x = 0; x < w; ++x) {
            const double v = row[x];
            if (v < cfg.keypoint_threshold) continue;
            bool peak = true;
            for (int o = 1; o <= half && peak; ++o) {
                if (x - o >= 0 && !(v > row[x - o])) peak = false;   // strict against the left
                if (x + o < w && !(v >= row[x + o])) peak = false;   // ties kept toward the leftmost
            }
            if (!peak) continue;
            out.push_back({x + quant.at(0, y, x), y + quant.at(1, y, x), x, y, v});
        }
    }
    return out;
}

std::vector<StartCenter> find_starting_points(const Grid& offsets, const std::vector<ScoredKeypoint>& valid,
                                              const DecoderConfig& cfg) {
    std::vector<int> candidate;
    for (std::size_t i = 0; i < valid.size(); ++i) {
        const double ox = offsets.at(0, valid[i].cy, valid[i].cx);
        const double oy = offsets.at(1, valid[i].cy, valid[i].cx);
        if (std::hypot(ox, oy) < cfg.start_norm_limit) candidate.push_back(static_cast<int>(i));
    }
    if (candidate.empty()) return {};

    DisjointSet dsu(static_cast<int>(candidate.size()));
    const double limit2 = cfg.theta_dis * cfg.theta_dis;
    for (std::size_t a = 0; a < candidate.size(); ++a) {
        for (std::size_t b = a + 1; b < candidate.size(); ++b) {
            const double dx = valid[candidate[a]].x - valid[candidate[b]].x;
            const double dy = valid[candidate[a]].y - valid[candidate[b]].y;
            if (dx * dx + dy * dy <= limit2) dsu.unite(static_cast<int>(a), static_cast<int>(b));
        }
    }

    std::vector<StartCenter> centers;
    std::vector<int> root_to_center(candidate.size(), -1);
    for (std::size_t a = 0; a < candidate.size(); ++a) {
        int root = dsu.find(static_cast<int>(a));
        if (root_to_center[root] < 0) {
            root_to_center[root] = static_cast<int>(centers.size());
            centers.push_back({0.0, 0.0, 0});
        }
        StartCenter& c = centers[root_to_center[root]];
        c.x += valid[candidate[a]].x;
        c.y += valid[candidate[a]].y;
        c.members += 1;
    }
    for (StartCenter& c : centers) {
        c.x /= c.members;
        c.y /= c.members;
    }
    std::sort(centers.begin(), centers.end(), [](const StartCenter& a, const StartCenter& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    return centers;
}

DecodedLaneSet associate(const std::vector<ScoredKeypoint>& valid, const Grid& offsets,
                         const std::vector<StartCenter>& centers, const DecoderConfig& cfg) {
    DecodedLaneSet result;
    result.spec = offsets.spec();
    if (valid.empty() || centers.empty()) return result;

    const std::size_t n = valid.size();
    std::vector<double> vx(n), vy(n), cx(centers.size()), cy(centers.size());
    for (std::size_t i = 0; i < n; ++i) {
        vx[i] = valid[i].x + offsets.at(0, valid[i].cy, valid[i].cx);
        vy[i] = valid[i].y + offsets.at(1, valid[i].cy, valid[i].cx);
    }
    for (std::size_t j = 0; j < centers.size(); ++j) {
        cx[j] = centers[j].x;
        cy[j] = centers[j].y;
    }

    std::vector<std::int32_t> best(n);
    std::vector<double> best_d2(n);
    switch (cfg.mode) {
        case AssocMode::Sequential:
            kernels::scalar_ops().nearest_center(vx.data(), vy.data(), n, cx.data(), cy.data(), centers.size(),
                                                 best.data(), best_d2.data());
            break;
        case AssocMode::Simd:
            kernels::ops().nearest_center(vx.data(), vy.data(), n, cx.data(), cy.data(), centers.size(),
                                          best.data(), best_d2.data());
            break;
        case AssocMode::Threaded: {
            unsigned workers = std::max(1u, cfg.threads);
            std::vector<std::thread> pool;
            const std::size_t chunk = (n + workers - 1) / workers;
            for (unsigned t = 0; t < workers; ++t) {
                const std::size_t begin = t * chunk;
                if (begin >= n) break;
                const std::size_t len = std::min(chunk, n - begin);
                pool.emplace_back([&, begin, len] {
                    kernels::scalar_ops().nearest_center(vx.data() + begin, vy.data() + begin, len, cx.data(),
                                                         cy.data(), centers.size(), best.data() + begin,
                                                         best_d2.data() + begin);
                });
            }
            for (auto& th : pool) th.join();
            break;
        }
    }

    // Assemble lanes in keypoint index order; everything downstream is a
    // deterministic function of the per-keypoint results.
    const double theta2 = cfg.theta_dis * cfg.theta_dis;
    struct Member {
        std::size_t idx;
        double residual;
    };
    std::vector<std::vector<Member>> buckets(centers.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (best[i] >= 0 && best_d2[i] < theta2) buckets[best[i]].push_back({i, std::sqrt(best_d2[i])});
    }

    const int r = offsets.spec().stride;
    for (std::size_t j = 0; j < buckets.size(); ++j) {
        auto& members = buckets[j];
        if (members.size() < 2) continue;
        std::sort(members.begin(), members.end(), [&](const Member& a, const Member& b) {
            const auto& ka = valid[a.idx];
            const auto& kb = valid[b.idx];
            if (ka.y != kb.y) return ka.y > kb.y;  // bottom first
            if (ka.x != kb.x) return ka.x < kb.x;
            return a.idx < b.idx;
        });
        DecodedLane lane;
        lane.center = centers[j];
        for (const Member& m : members) {
            const auto& kp = valid[m.idx];
            if (!lane.points.empty() && !(kp.y * r < lane.points.back().y)) continue;  // keep y strictly decreasing
            lane.points.push_back({kp.x * r, kp.y * r});
            lane.confidences.push_back(kp.confidence);
            lane.residuals.push_back(m.residual);
        }
        if (lane.points.size() >= 2) result.lanes.push_back(std::move(lane));
    }

    std::sort(result.lanes.begin(), result.lanes.end(), [](const DecodedLane& a, const DecodedLane& b) {
        if (a.points.front().x != b.points.front().x) return a.points.front().x < b.points.front().x;
        return a.points.front().y > b.points.front().y;
    });
    return result;
}

DecodedLaneSet decode(const Grid& conf, const Grid& quant, const Grid& offsets, const DecoderConfig& cfg) {
    check_spec(conf, offsets);
    auto valid = select_keypoints(conf, quant, cfg);
    auto centers = find_starting_points(offsets, valid, cfg);
    return associate(valid, offsets, centers, cfg);
}

}  // namespace lanekit
