#include "lanekit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lanekit/kernels.hpp"
#include "lanekit/matcher.hpp"

namespace lanekit {

namespace {

void require_same_shape(const Grid& a, const Grid& b, const char* what) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string("shape mismatch: ") + what);
}

}  // namespace

LossReport focal_loss(const Grid& pred, const Grid& target, const LossConfig& cfg) {
    require_same_shape(pred, target, "focal_loss");
    if (pred.channels() != 1) throw std::invalid_argument("focal_loss expects a 1-channel grid");

    const double eps = cfg.focal_eps;
    const double a = cfg.alpha;
    const double b = cfg.beta;
    const double inv = 1.0 / pred.spec().cells();

    LossReport report;
    report.grad = Grid(pred.spec(), 1);
    std::vector<double> contrib(pred.spec().cells());
    const auto& pv = pred.data();
    const auto& tv = target.data();
    auto& gv = report.grad.data();

    for (std::size_t i = 0; i < pv.size(); ++i) {
        const bool clamped = pv[i] < eps || pv[i] > 1.0 - eps;
        const double p = std::clamp(pv[i], eps, 1.0 - eps);
        const double y = tv[i];
        double g;
        if (y == 1.0) {
            double t = std::pow(1.0 - p, a);
            contrib[i] = -(t * std::log(p));
            g = inv * (a * std::pow(1.0 - p, a - 1.0) * std::log(p) - t / p);
        } else {
            double w = std::pow(1.0 - y, b);
            double pa = std::pow(p, a);
            contrib[i] = -(w * pa * std::log1p(-p));
            g = inv * w * (pa / (1.0 - p) - a * std::pow(p, a - 1.0) * std::log1p(-p));
        }
        gv[i] = clamped ? 0.0 : g;
    }
    report.value = inv * kernels::pairwise_sum(contrib);
    return report;
}

LossReport masked_l1(const Grid& pred, const Grid& target, const Grid& mask) {
    require_same_shape(pred, target, "masked_l1");
    if (!(mask.spec() == pred.spec()) || mask.channels() != 1)
        throw std::invalid_argument("masked_l1 mask must be a 1-channel grid over the same spec");

    const double inv = 1.0 / pred.spec().cells();
    const std::size_t cells = pred.spec().cells();
    LossReport report;
    report.grad = Grid(pred.spec(), pred.channels());
    std::vector<double> contrib(cells * pred.channels());
    const auto& ops = kernels::ops();
    for (int c = 0; c < pred.channels(); ++c) {
        ops.masked_abs_diff(pred.channel(c).data(), target.channel(c).data(), mask.channel(0).data(), inv,
                            contrib.data() + static_cast<std::size_t>(c) * cells, report.grad.channel(c).data(),
                            cells);
    }
    report.value = inv * kernels::pairwise_sum(contrib);
    return report;
}

AuxLossReport aux_loss(const std::vector<AuxItem>& items, const LossConfig& cfg) {
    if (items.empty()) throw std::invalid_argument("aux_loss needs at least one keypoint");
    const std::size_t m_count = items.front().pred.size();
    if (m_count == 0) throw std::invalid_argument("aux_loss: empty prediction set");
    for (const AuxItem& it : items) {
        if (it.pred.size() != m_count) throw std::invalid_argument("aux_loss: inconsistent prediction counts");
        if (it.gt.empty()) throw std::invalid_argument("aux_loss: empty ground-truth set");
    }

    const double beta = cfg.smooth_l1_beta;
    const double norm = 1.0 / (static_cast<double>(items.size()) * m_count);

    AuxLossReport report;
    report.grad.resize(items.size());
    std::vector<double> contrib;
    contrib.reserve(items.size() * m_count * 2);

    for (std::size_t i = 0; i < items.size(); ++i) {
        const AuxItem& it = items[i];
        report.grad[i].assign(m_count, Vec2{0.0, 0.0});

        CostMatrix cost(static_cast<int>(m_count), static_cast<int>(it.gt.size()));
        for (std::size_t m = 0; m < m_count; ++m)
            for (std::size_t k = 0; k < it.gt.size(); ++k)
                cost.at(static_cast<int>(m), static_cast<int>(k)) =
                    std::hypot(it.pred[m].x - it.gt[k].x, it.pred[m].y - it.gt[k].y);
        Assignment assign = solve(cost);

        for (const auto& [m, k] : assign.pairs) {
            const double rx = it.pred[m].x - it.gt[k].x;
            const double ry = it.pred[m].y - it.gt[k].y;
            for (int comp = 0; comp < 2; ++comp) {
                const double r = comp == 0 ? rx : ry;
                double value, deriv;
                if (std::fabs(r) <= beta) {
                    value = r * r / (2.0 * beta);
                    deriv = r / beta;
                } else {
                    value = std::fabs(r) - beta / 2.0;
                    deriv = r > 0.0 ? 1.0 : -1.0;
                }
                contrib.push_back(value);
                (comp == 0 ? report.grad[i][m].x : report.grad[i][m].y) = deriv * norm;
            }
        }
    }
    report.value = norm * kernels::pairwise_sum(contrib);
    return report;
}

TotalLossReport total_loss(const Grid& pred_conf, const Grid& pred_quant, const Grid& pred_offsets,
                           const std::vector<AuxItem>& aux_items, const Targets& targets, const LossConfig& cfg) {
    TotalLossReport total;
    total.conf_grad = Grid(pred_conf.spec(), pred_conf.channels());
    total.quant_grad = Grid(pred_quant.spec(), pred_quant.channels());
    total.offset_grad = Grid(pred_offsets.spec(), pred_offsets.channels());

    auto scale_into = [](Grid& dst, const Grid& src, double w) {
        for (std::size_t i = 0; i < dst.data().size(); ++i) dst.data()[i] = w * src.data()[i];
    };

    if (cfg.lambda_point != 0.0) {
        LossReport r = focal_loss(pred_conf, targets.confidence, cfg);
        total.point = r.value;
        scale_into(total.conf_grad, r.grad, cfg.lambda_point);
    }
    if (cfg.lambda_quant != 0.0) {
        LossReport r = masked_l1(pred_quant, targets.quant, targets.mask);
        total.quant = r.value;
        scale_into(total.quant_grad, r.grad, cfg.lambda_quant);
    }
    if (cfg.lambda_offset != 0.0) {
        LossReport r = masked_l1(pred_offsets, targets.offsets, targets.mask);
        total.offset = r.value;
        scale_into(total.offset_grad, r.grad, cfg.lambda_offset);
    }
    if (cfg.lambda_aux != 0.0 && !aux_items.empty()) {
        AuxLossReport r = aux_loss(aux_items, cfg);
        total.aux = r.value;
        total.aux_grad.resize(r.grad.size());
        for (std::size_t i = 0; i < r.grad.size(); ++i) {
            total.aux_grad[i].resize(r.grad[i].size());
            for (std::size_t m = 0; m < r.grad[i].size(); ++m)
                total.aux_grad[i][m] = {cfg.lambda_aux * r.grad[i][m].x, cfg.lambda_aux * r.grad[i][m].y};
        }
    }
    total.value = cfg.lambda_point * total.point + cfg.lambda_quant * total.quant +
                  cfg.lambda_offset * total.offset + cfg.lambda_aux * total.aux;
    return total;
}

}  // namespace lanekit
