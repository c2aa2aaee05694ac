#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "edgepress/tensor.hpp"

namespace edgepress {

/// 3x3 convolution layer with "same" geometry via reflect padding.
/// Output spatial dims are ceil(in / stride); stride is 1 or 2.
struct ConvLayer {
    Tensor weights;             // (out_ch, in_ch, 3, 3)
    std::vector<double> bias;   // per output channel
    int stride = 1;

    ConvLayer() = default;
    ConvLayer(int out_ch, int in_ch, int stride_ = 1)
        : weights(out_ch, in_ch, 3, 3), bias(out_ch, 0.0), stride(stride_) {
        if (stride_ != 1 && stride_ != 2) {
            throw std::invalid_argument("ConvLayer: stride must be 1 or 2");
        }
    }

    int out_ch() const { return weights.b; }
    int in_ch() const { return weights.c; }
    std::size_t param_count() const { return weights.numel() + bias.size(); }
};

/// Gradients of a scalar loss with respect to one layer's parameters.
struct ConvGrads {
    Tensor weights;
    std::vector<double> bias;

    ConvGrads() = default;
    explicit ConvGrads(const ConvLayer& layer)
        : weights(zeros_like(layer.weights)), bias(layer.bias.size(), 0.0) {}
};

Tensor conv2d_forward(const Tensor& input, const ConvLayer& layer);

/// Returns the gradient of the loss with respect to the layer input and
/// accumulates (+=) parameter gradients into `grads`. `want_input_grad`
/// skips the input-gradient pass when the caller does not need it.
Tensor conv2d_backward(const Tensor& input, const ConvLayer& layer,
                       const Tensor& grad_out, ConvGrads& grads,
                       bool want_input_grad = true,
                       bool want_param_grads = true);

Tensor relu_forward(const Tensor& x);
/// Subgradient at exactly 0 is 0.
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);

/// (b, 4c, h, w) -> (b, c, 2h, 2w). Channel group (4k..4k+3) fills the
/// 2x2 cell of output channel k as (TL, TR, BL, BR).
Tensor pixel_shuffle_x2(const Tensor& x);
/// Exact inverse of pixel_shuffle_x2; it is also its adjoint.
Tensor pixel_unshuffle_x2(const Tensor& x);

Tensor nearest_upsample_x2(const Tensor& x);
/// Adjoint of nearest_upsample_x2 (2x2 sum pooling).
Tensor nearest_upsample_x2_backward(const Tensor& grad_out);

Tensor clamp01(const Tensor& x);
/// Masks grad where the pre-clamp value lies outside the open interval (0,1).
Tensor clamp01_backward(const Tensor& pre_clamp, const Tensor& grad_out);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-7;
};

/// First/second moment buffers for one flat parameter vector.
struct AdamMoments {
    std::vector<double> m;
    std::vector<double> v;
};

/// Bias-corrected Adam update on a flat parameter vector. `step_count`
/// is the number of completed steps before this call.
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamMoments& moments, std::int64_t step_count,
               const AdamConfig& cfg);

/// Adam state for a stack of conv layers; step counter shared.
struct AdamState {
    std::int64_t step_count = 0;
    AdamConfig cfg;
    std::vector<AdamMoments> weight_moments;
    std::vector<AdamMoments> bias_moments;

    void init(const std::vector<ConvLayer*>& layers, const AdamConfig& c);
    void step(const std::vector<ConvLayer*>& layers,
              const std::vector<ConvGrads>& grads);
};

/// Deterministic RNG with a platform-stable uniform mapping.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [lo, hi) from the top 53 bits.
    double uniform(double lo, double hi) {
        const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    /// Fisher-Yates shuffle of an index vector.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_u64() % i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

/// He-uniform initialization: weights in +-sqrt(6 / fan_in), bias zero.
void he_init(ConvLayer& layer, Rng& rng);

}  // namespace edgepress
