#include "lanekit/fit.hpp"

#include <cmath>
#include <stdexcept>

namespace lanekit {

namespace {

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

FitResult fit(const Targets& targets, const FitConfig& cfg) {
    if (!(cfg.lr >= 0.0)) throw std::invalid_argument("learning rate must be nonnegative");
    if (cfg.iterations < 1) throw std::invalid_argument("iteration count must be >= 1");
    if (cfg.m_samples < 1) throw std::invalid_argument("m_samples must be >= 1");

    const GridSpec spec = targets.confidence.spec();
    const double eps = cfg.loss.focal_eps;
    const std::size_t nk = targets.adjacency.size();

    // Parameters: raw confidence grid (squashed before the loss), quant and
    // offset grids, and M free adjacency-offset vectors per keypoint.
    Grid raw(spec, 1);
    Grid pq(spec, 2);
    Grid po(spec, 2);
    std::vector<std::vector<Vec2>> aux_pred(nk, std::vector<Vec2>(cfg.m_samples, Vec2{0.0, 0.0}));

    auto init_value = [&](double conf) { return cfg.squash == Squash::Sigmoid ? logit(conf) : conf; };
    if (cfg.init_at_target) {
        for (std::size_t i = 0; i < raw.data().size(); ++i)
            raw.data()[i] = init_value(targets.mask.data()[i] != 0.0 ? 1.0 - eps : eps);
        pq.data() = targets.quant.data();
        po.data() = targets.offsets.data();
        for (std::size_t i = 0; i < nk; ++i) {
            const auto& gt = targets.adjacency[i].offsets;
            for (int m = 0; m < cfg.m_samples; ++m)
                aux_pred[i][m] = gt[std::min<std::size_t>(m, gt.size() - 1)];
        }
    } else {
        for (double& v : raw.data()) v = init_value(cfg.init_confidence);
    }

    FitResult result;
    Grid conf(spec, 1);
    std::vector<AuxItem> aux_items(nk);

    auto evaluate = [&]() {
        for (std::size_t i = 0; i < conf.data().size(); ++i)
            conf.data()[i] = cfg.squash == Squash::Sigmoid ? sigmoid(raw.data()[i]) : raw.data()[i];
        for (std::size_t i = 0; i < nk; ++i) {
            aux_items[i].pred = aux_pred[i];
            aux_items[i].gt = targets.adjacency[i].offsets;
        }
        return total_loss(conf, pq, po, aux_items, targets, cfg.loss);
    };

    auto record = [&](int iteration, const TotalLossReport& rep, double grad_norm) {
        result.trace.push_back({iteration, rep.value, rep.point, rep.quant, rep.offset, rep.aux, grad_norm});
    };

    auto params_finite = [&]() {
        for (double v : raw.data())
            if (!std::isfinite(v)) return false;
        for (double v : pq.data())
            if (!std::isfinite(v)) return false;
        for (double v : po.data())
            if (!std::isfinite(v)) return false;
        for (const auto& per_kp : aux_pred)
            for (const Vec2& v : per_kp)
                if (!std::isfinite(v.x) || !std::isfinite(v.y)) return false;
        return true;
    };

    for (int iter = 0; iter <= cfg.iterations; ++iter) {
        if (!params_finite()) {
            result.diverged = true;
            break;
        }
        TotalLossReport rep = evaluate();

        double sq = 0.0;
        Grid raw_grad(spec, 1);
        for (std::size_t i = 0; i < raw.data().size(); ++i) {
            double d = rep.conf_grad.data()[i];
            if (cfg.squash == Squash::Sigmoid) {
                const double s = conf.data()[i];
                d *= s * (1.0 - s);
            }
            raw_grad.data()[i] = d;
            sq += d * d;
        }
        for (double g : rep.quant_grad.data()) sq += g * g;
        for (double g : rep.offset_grad.data()) sq += g * g;
        for (const auto& per_kp : rep.aux_grad)
            for (const Vec2& g : per_kp) sq += g.x * g.x + g.y * g.y;
        const double grad_norm = std::sqrt(sq);

        if (!std::isfinite(rep.value)) {
            result.diverged = true;
            break;
        }
        result.last_finite_iteration = iter;
        if (iter == 0 || iter == cfg.iterations || (cfg.log_every > 0 && iter % cfg.log_every == 0))
            record(iter, rep, grad_norm);
        if (iter == cfg.iterations) break;

        for (std::size_t i = 0; i < raw.data().size(); ++i) raw.data()[i] -= cfg.lr * raw_grad.data()[i];
        for (std::size_t i = 0; i < pq.data().size(); ++i) pq.data()[i] -= cfg.lr * rep.quant_grad.data()[i];
        for (std::size_t i = 0; i < po.data().size(); ++i) po.data()[i] -= cfg.lr * rep.offset_grad.data()[i];
        if (!rep.aux_grad.empty())
            for (std::size_t i = 0; i < nk; ++i)
                for (int m = 0; m < cfg.m_samples; ++m) {
                    aux_pred[i][m].x -= cfg.lr * rep.aux_grad[i][m].x;
                    aux_pred[i][m].y -= cfg.lr * rep.aux_grad[i][m].y;
                }
    }

    for (std::size_t i = 0; i < conf.data().size(); ++i)
        conf.data()[i] = cfg.squash == Squash::Sigmoid ? sigmoid(raw.data()[i]) : raw.data()[i];
    result.confidence = conf;
    result.quant = pq;
    result.offsets = po;
    result.aux_pred = std::move(aux_pred);
    return result;
}

}  // namespace lanekit
