#include "edgepress/losses.hpp"

namespace edgepress {

LossResult mse_loss(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target)) {
        throw std::invalid_argument("mse_loss: shape mismatch");
    }
    LossResult res;
    res.grad = zeros_like(pred);
    const double inv_n = 1.0 / static_cast<double>(pred.numel());
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        const double r = pred.data[i] - target.data[i];
        acc += r * r;
        res.grad.data[i] = 2.0 * r * inv_n;
    }
    res.value = acc * inv_n;
    return res;
}

LossResult edge_aware_loss(const Tensor& pred, const Tensor& target,
                           const EdgeMap& edges, const LossConfig& cfg) {
    if (!pred.same_shape(target)) {
        throw std::invalid_argument("edge_aware_loss: shape mismatch");
    }
    if (pred.b != 1 || pred.c != 1 || edges.h != pred.h || edges.w != pred.w) {
        throw std::invalid_argument("edge_aware_loss: edge map dims mismatch");
    }
    if (cfg.alpha < 0.0 || cfg.alpha > 1.0) {
        throw std::invalid_argument("edge_aware_loss: alpha must be in [0,1]");
    }
    const double alpha = cfg.alpha, gamma = cfg.gamma();
    if (alpha == 1.0) return mse_loss(pred, target);  // exact reduction

    LossResult res;
    res.grad = zeros_like(pred);
    const double inv_n = 1.0 / static_cast<double>(pred.numel());
    double mse_acc = 0.0, edge_acc = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        const double r = pred.data[i] - target.data[i];
        mse_acc += r * r;
        const double er = edges.mask[i] ? r : 0.0;
        edge_acc += er * er;
        res.grad.data[i] = 2.0 * (alpha * r + gamma * er) * inv_n;
    }
    // written as edge_acc + alpha * (mse_acc - edge_acc) so that an
    // all-ones map reduces to the plain MSE value bit for bit
    res.value = (edge_acc + alpha * (mse_acc - edge_acc)) * inv_n;
    return res;
}

}  // namespace edgepress
