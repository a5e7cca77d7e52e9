#pragma once

#include <vector>

#include "lanekit/losses.hpp"

namespace lanekit {

enum class Squash { Sigmoid, Clamp };

struct FitConfig {
    double lr = 0.5;
    int iterations = 1000;
    int log_every = 1;
    LossConfig loss;
    int m_samples = 9;  // predicted adjacent offsets per keypoint
    Squash squash = Squash::Sigmoid;
    bool init_at_target = false;  // start at the loss minimizer instead of the flat init
    double init_confidence = 0.1;
};

struct FitTrace {
    int iteration = 0;
    double total = 0.0, point = 0.0, quant = 0.0, offset = 0.0, aux = 0.0;
    double grad_norm = 0.0;
};

struct FitResult {
    Grid confidence;  // post-squash values
    Grid quant;
    Grid offsets;
    std::vector<std::vector<Vec2>> aux_pred;  // NK x M
    std::vector<FitTrace> trace;              // iteration 0, every log_every, and the final state
    bool diverged = false;
    int last_finite_iteration = -1;
};

/// Plain gradient descent on the weighted total loss over raw map tensors.
/// Confidence is driven through the configured squash so it stays in (0, 1).
FitResult fit(const Targets& targets, const FitConfig& cfg);

}  // namespace lanekit
