#include "lanekit/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lanekit/matcher.hpp"

namespace lanekit {

namespace {

// Grid cells traversed by the segment, Amanatides-Woo traversal.
template <typename Fn>
void supercover(double x0, double y0, double x1, double y1, Fn&& emit) {
    int ix = static_cast<int>(std::floor(x0));
    int iy = static_cast<int>(std::floor(y0));
    const int ex = static_cast<int>(std::floor(x1));
    const int ey = static_cast<int>(std::floor(y1));
    const double dx = x1 - x0;
    const double dy = y1 - y0;
    const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
    const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
    const double inf = std::numeric_limits<double>::infinity();
    double t_max_x = inf, t_delta_x = inf;
    double t_max_y = inf, t_delta_y = inf;
    if (step_x != 0) {
        const double next = step_x > 0 ? (ix + 1 - x0) : (x0 - ix);
        t_max_x = next / std::fabs(dx);
        t_delta_x = 1.0 / std::fabs(dx);
    }
    if (step_y != 0) {
        const double next = step_y > 0 ? (iy + 1 - y0) : (y0 - iy);
        t_max_y = next / std::fabs(dy);
        t_delta_y = 1.0 / std::fabs(dy);
    }
    const int guard = 4 * (std::abs(ex - ix) + std::abs(ey - iy) + 2);
    for (int it = 0; it < guard; ++it) {
        emit(ix, iy);
        if (ix == ex && iy == ey) return;
        if (t_max_x < t_max_y) {
            t_max_x += t_delta_x;
            ix += step_x;
        } else if (t_max_y < t_max_x) {
            t_max_y += t_delta_y;
            iy += step_y;
        } else {  // exact corner: visit both adjacent cells
            if (step_x != 0 && ix != ex) emit(ix + step_x, iy);
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
            ix += step_x;
            iy += step_y;
        }
    }
    emit(ex, ey);
}

double interp_x_at_row(const Lane& lane, double row) {
    const auto& pts = lane.points();
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (row <= pts[i - 1].y && row >= pts[i].y) {
            const double t = (pts[i - 1].y - row) / (pts[i - 1].y - pts[i].y);
            return pts[i - 1].x + t * (pts[i].x - pts[i - 1].x);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();  // outside the lane's span: absent
}

}  // namespace

LaneMask::LaneMask(int width, int height)
    : width_(width), height_(height), words_per_row_((width + 63) / 64),
      bits_(static_cast<std::size_t>(words_per_row_) * height, 0) {}

void LaneMask::stamp_disc_run(int x, int y, int half_width) {
    if (y < 0 || y >= height_) return;
    int a = std::max(0, x - half_width);
    int b = std::min(width_ - 1, x + half_width);
    if (a > b) return;
    std::uint64_t* row = bits_.data() + static_cast<std::size_t>(y) * words_per_row_;
    int wa = a / 64, wb = b / 64;
    for (int w = wa; w <= wb; ++w) {
        int lo = w == wa ? a % 64 : 0;
        int hi = w == wb ? b % 64 : 63;
        std::uint64_t m = hi == 63 ? ~0ULL : ((1ULL << (hi + 1)) - 1);
        if (lo > 0) m &= ~((1ULL << lo) - 1);
        row[w] |= m;
    }
}

std::size_t LaneMask::count() const {
    std::size_t c = 0;
    for (std::uint64_t w : bits_) c += std::popcount(w);
    return c;
}

std::size_t LaneMask::intersection(const LaneMask& a, const LaneMask& b) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < a.bits_.size(); ++i) c += std::popcount(a.bits_[i] & b.bits_[i]);
    return c;
}

std::size_t LaneMask::union_count(const LaneMask& a, const LaneMask& b) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < a.bits_.size(); ++i) c += std::popcount(a.bits_[i] | b.bits_[i]);
    return c;
}

LaneMask rasterize_lane(const Lane& lane, int width, int height, int lane_width) {
    if (lane_width < 1) throw std::invalid_argument("lane_width must be >= 1");
    LaneMask mask(width, height);
    const double radius = lane_width / 2.0;
    const int r_int = static_cast<int>(std::floor(radius));
    std::vector<int> span(2 * r_int + 1);
    for (int dy = -r_int; dy <= r_int; ++dy)
        span[dy + r_int] = static_cast<int>(std::floor(std::sqrt(radius * radius - static_cast<double>(dy) * dy)));

    const auto& pts = lane.points();
    auto stamp = [&](int cx, int cy) {
        for (int dy = -r_int; dy <= r_int; ++dy) mask.stamp_disc_run(cx, cy + dy, span[dy + r_int]);
    };
    for (std::size_t i = 1; i < pts.size(); ++i)
        supercover(pts[i - 1].x, pts[i - 1].y, pts[i].x, pts[i].y, stamp);
    return mask;
}

void finalize_counts(EvalReport& r) {
    r.precision = (r.tp + r.fp) > 0 ? static_cast<double>(r.tp) / (r.tp + r.fp) : 0.0;
    r.recall = (r.tp + r.fn) > 0 ? static_cast<double>(r.tp) / (r.tp + r.fn) : 0.0;
    r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
}

EvalReport culane_f1(const LaneSet& pred, const LaneSet& gt, int width, int height, const CulaneConfig& cfg) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("image dimensions must be positive");
    EvalReport report;
    if (pred.empty() || gt.empty()) {
        report.fp = static_cast<int>(pred.size());
        report.fn = static_cast<int>(gt.size());
        finalize_counts(report);
        return report;
    }

    std::vector<LaneMask> pm, gm;
    pm.reserve(pred.size());
    gm.reserve(gt.size());
    for (const Lane& l : pred) pm.push_back(rasterize_lane(l, width, height, cfg.lane_width));
    for (const Lane& l : gt) gm.push_back(rasterize_lane(l, width, height, cfg.lane_width));

    CostMatrix cost(static_cast<int>(pred.size()), static_cast<int>(gt.size()));
    std::vector<std::vector<double>> iou(pred.size(), std::vector<double>(gt.size(), 0.0));
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (std::size_t j = 0; j < gt.size(); ++j) {
            const std::size_t inter = LaneMask::intersection(pm[i], gm[j]);
            const std::size_t uni = LaneMask::union_count(pm[i], gm[j]);
            iou[i][j] = uni > 0 ? static_cast<double>(inter) / uni : 0.0;
            cost.at(static_cast<int>(i), static_cast<int>(j)) = 1.0 - iou[i][j];
        }
    }

    Assignment assign = solve(cost);
    for (const auto& [i, j] : assign.pairs)
        if (iou[i][j] > cfg.iou_threshold) ++report.tp;
    report.fp = static_cast<int>(pred.size()) - report.tp;
    report.fn = static_cast<int>(gt.size()) - report.tp;
    finalize_counts(report);
    return report;
}

EvalReport tusimple_accuracy(const LaneSet& pred, const LaneSet& gt, int width, int height,
                             const TusimpleConfig& cfg) {
    (void)width;
    std::vector<int> rows = cfg.eval_rows;
    if (rows.empty())
        for (int y = 0; y < height; y += 10) rows.push_back(y);

    // Per-lane x at every eval row; NaN marks rows outside a lane's span.
    auto sample = [&](const LaneSet& lanes) {
        std::vector<std::vector<double>> xs(lanes.size(), std::vector<double>(rows.size()));
        for (std::size_t i = 0; i < lanes.size(); ++i)
            for (std::size_t r = 0; r < rows.size(); ++r) xs[i][r] = interp_x_at_row(lanes[i], rows[r]);
        return xs;
    };
    const auto px = sample(pred);
    const auto gx = sample(gt);

    EvalReport report;
    long total_points = 0, total_correct = 0;
    std::vector<char> pred_claimed(pred.size(), 0);
    std::vector<char> pred_is_tp(pred.size(), 0);

    for (std::size_t g = 0; g < gt.size(); ++g) {
        int present = 0;
        for (double v : gx[g])
            if (!std::isnan(v)) ++present;
        if (present == 0) continue;
        total_points += present;

        int best_correct = -1;
        int best_pred = -1;
        for (std::size_t p = 0; p < pred.size(); ++p) {
            if (pred_claimed[p]) continue;
            int correct = 0;
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (std::isnan(gx[g][r])) continue;
                if (!std::isnan(px[p][r]) && std::fabs(px[p][r] - gx[g][r]) < cfg.pixel_tolerance) ++correct;
            }
            if (correct > best_correct) {
                best_correct = correct;
                best_pred = static_cast<int>(p);
            }
        }
        if (best_pred >= 0) {
            pred_claimed[best_pred] = 1;
            total_correct += best_correct;
            const double lane_acc = static_cast<double>(best_correct) / present;
            if (lane_acc > cfg.lane_accuracy_threshold) {
                pred_is_tp[best_pred] = 1;
                ++report.tp;
            } else {
                ++report.fn;
            }
        } else {
            ++report.fn;
        }
    }
    for (std::size_t p = 0; p < pred.size(); ++p)
        if (!pred_is_tp[p]) ++report.fp;

    report.gt_points = total_points;
    report.correct_points = total_correct;
    report.accuracy = total_points > 0 ? static_cast<double>(total_correct) / total_points : 0.0;
    finalize_counts(report);
    return report;
}

}  // namespace lanekit
