#pragma once

#include "edgepress/image.hpp"
#include "edgepress/tensor.hpp"

namespace edgepress {

/// Mixing weight for the edge-aware objective; gamma = 1 - alpha.
struct LossConfig {
    double alpha = 0.75;

    double gamma() const { return 1.0 - alpha; }
};

struct LossResult {
    double value = 0.0;
    Tensor grad;  // d(value)/d(pred)
};

/// mean((pred - target)^2); grad = 2 (pred - target) / count.
LossResult mse_loss(const Tensor& pred, const Tensor& target);

/// alpha * mean(r^2) + gamma * mean((E o r)^2), r = pred - target.
/// E is binary, so E o E = E and grad = (2/count) (alpha r + gamma E o r).
LossResult edge_aware_loss(const Tensor& pred, const Tensor& target,
                           const EdgeMap& edges, const LossConfig& cfg);

}  // namespace edgepress
