#pragma once

#include <vector>

#include "lanekit/domain.hpp"
#include "lanekit/encoder.hpp"

namespace lanekit {

struct LossConfig {
    double alpha = 2.0;
    double beta = 4.0;
    double lambda_point = 1.0;
    double lambda_quant = 1.0;
    double lambda_offset = 0.5;
    double lambda_aux = 1.0;
    double smooth_l1_beta = 1.0;
    double focal_eps = 1e-6;
};

struct LossReport {
    double value = 0.0;
    Grid grad;  // same shape as the predicted input
};

/// One keypoint's auxiliary-loss data: M predicted adjacent offsets against
/// the K ground-truth offsets of its lane (map cells).
struct AuxItem {
    std::vector<Vec2> pred;  // M entries
    std::vector<Vec2> gt;    // K entries
};

struct AuxLossReport {
    double value = 0.0;
    std::vector<std::vector<Vec2>> grad;  // same shape as the predictions
};

struct TotalLossReport {
    double value = 0.0;
    double point = 0.0;
    double quant = 0.0;
    double offset = 0.0;
    double aux = 0.0;
    Grid conf_grad;
    Grid quant_grad;
    Grid offset_grad;
    std::vector<std::vector<Vec2>> aux_grad;
};

/// Penalty-reduced focal loss over the confidence map, normalized by the cell
/// count. Predictions are clamped to [eps, 1-eps]; the gradient is zero where
/// the clamp is active.
LossReport focal_loss(const Grid& pred, const Grid& target, const LossConfig& cfg);

/// L1 restricted to masked cells, summed over channels, normalized by the
/// cell count. Serves both the quantization and the starting-point offset
/// losses.
LossReport masked_l1(const Grid& pred, const Grid& target, const Grid& mask);

/// Hungarian-matched SmoothL1 between predicted and ground-truth adjacent
/// offsets, normalized by (#keypoints * M). The assignment minimizes total L2
/// cost and is treated as constant in the gradient.
AuxLossReport aux_loss(const std::vector<AuxItem>& items, const LossConfig& cfg);

/// Weighted combination of the four terms. Terms with a zero weight are
/// skipped entirely.
TotalLossReport total_loss(const Grid& pred_conf, const Grid& pred_quant, const Grid& pred_offsets,
                           const std::vector<AuxItem>& aux_items, const Targets& targets, const LossConfig& cfg);

}  // namespace lanekit
