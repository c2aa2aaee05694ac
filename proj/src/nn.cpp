#include "edgepress/nn.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace edgepress {

namespace {

// Scratch buffers for the reflect-padded planes. thread_local keeps the
// ops concurrently callable.
thread_local std::vector<double> g_pad_scratch;
thread_local std::vector<double> g_gpad_scratch;

void check_conv_args(const Tensor& input, const ConvLayer& layer) {
    if (layer.weights.h != 3 || layer.weights.w != 3) {
        throw std::invalid_argument("conv2d: kernel must be 3x3");
    }
    if (input.c != layer.in_ch()) {
        throw std::invalid_argument(
            "conv2d: input has " + std::to_string(input.c) +
            " channels, layer expects " + std::to_string(layer.in_ch()));
    }
    if (input.h < 1 || input.w < 1 || input.b < 1) {
        throw std::invalid_argument("conv2d: empty input");
    }
    if (layer.stride != 1 && layer.stride != 2) {
        throw std::invalid_argument("conv2d: stride must be 1 or 2");
    }
    if (layer.bias.size() != static_cast<std::size_t>(layer.out_ch())) {
        throw std::invalid_argument("conv2d: bias size mismatch");
    }
}

// Copies one batch item into (C, H+2, W+2) with 1-pixel mirrored borders.
void build_padded(const Tensor& input, int bi, std::vector<double>& pad) {
    const int C = input.c, H = input.h, W = input.w;
    const int PH = H + 2, PW = W + 2;
    pad.resize(static_cast<std::size_t>(C) * PH * PW);
    for (int ic = 0; ic < C; ++ic) {
        const double* src = input.plane(bi, ic);
        double* dst = pad.data() + static_cast<std::size_t>(ic) * PH * PW;
        for (int r = 0; r < PH; ++r) {
            const int sy = reflect_index(r - 1, H);
            const double* srow = src + static_cast<std::size_t>(sy) * W;
            double* drow = dst + static_cast<std::size_t>(r) * PW;
            drow[0] = srow[reflect_index(-1, W)];
            std::memcpy(drow + 1, srow, sizeof(double) * W);
            drow[PW - 1] = srow[reflect_index(W, W)];
        }
    }
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const ConvLayer& layer) {
    check_conv_args(input, layer);
    const int s = layer.stride;
    const int H = input.h, W = input.w, PW = W + 2;
    const int OH = (H + s - 1) / s, OW = (W + s - 1) / s;
    const int Cout = layer.out_ch(), Cin = layer.in_ch();

    Tensor out(input.b, Cout, OH, OW);
    std::vector<double>& pad = g_pad_scratch;

    for (int bi = 0; bi < input.b; ++bi) {
        build_padded(input, bi, pad);
        for (int oc = 0; oc < Cout; ++oc) {
            double* op = out.plane(bi, oc);
            const double bv = layer.bias[oc];
            for (std::size_t i = 0, n = static_cast<std::size_t>(OH) * OW; i < n; ++i) {
                op[i] = bv;
            }
            for (int ic = 0; ic < Cin; ++ic) {
                const double* pp = pad.data() + static_cast<std::size_t>(ic) * (H + 2) * PW;
                for (int ky = 0; ky < 3; ++ky) {
                    for (int kx = 0; kx < 3; ++kx) {
                        const double wv = layer.weights.at(oc, ic, ky, kx);
                        for (int oy = 0; oy < OH; ++oy) {
                            const double* srow = pp + static_cast<std::size_t>(oy * s + ky) * PW + kx;
                            double* drow = op + static_cast<std::size_t>(oy) * OW;
                            if (s == 1) {
                                for (int ox = 0; ox < OW; ++ox) drow[ox] += wv * srow[ox];
                            } else {
                                for (int ox = 0; ox < OW; ++ox) drow[ox] += wv * srow[2 * ox];
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor conv2d_backward(const Tensor& input, const ConvLayer& layer,
                       const Tensor& grad_out, ConvGrads& grads,
                       bool want_input_grad, bool want_param_grads) {
    check_conv_args(input, layer);
    const int s = layer.stride;
    const int H = input.h, W = input.w, PH = H + 2, PW = W + 2;
    const int OH = (H + s - 1) / s, OW = (W + s - 1) / s;
    const int Cout = layer.out_ch(), Cin = layer.in_ch();
    if (grad_out.b != input.b || grad_out.c != Cout || grad_out.h != OH ||
        grad_out.w != OW) {
        throw std::invalid_argument("conv2d_backward: grad_out shape mismatch");
    }
    if (want_param_grads &&
        (!grads.weights.same_shape(layer.weights) ||
         grads.bias.size() != layer.bias.size())) {
        throw std::invalid_argument("conv2d_backward: grads buffer shape mismatch");
    }

    Tensor grad_input;
    if (want_input_grad) grad_input.resize_as(input.b, Cin, H, W);

    std::vector<double>& pad = g_pad_scratch;
    std::vector<double>& gpad = g_gpad_scratch;

    for (int bi = 0; bi < input.b; ++bi) {
        if (want_param_grads) build_padded(input, bi, pad);
        if (want_input_grad) {
            gpad.assign(static_cast<std::size_t>(Cin) * PH * PW, 0.0);
        }
        for (int oc = 0; oc < Cout; ++oc) {
            const double* gop = grad_out.plane(bi, oc);
            if (want_param_grads) {
                double bsum = 0.0;
                for (std::size_t i = 0, n = static_cast<std::size_t>(OH) * OW; i < n; ++i) {
                    bsum += gop[i];
                }
                grads.bias[oc] += bsum;
            }
            for (int ic = 0; ic < Cin; ++ic) {
                const std::size_t plane_off = static_cast<std::size_t>(ic) * PH * PW;
                for (int ky = 0; ky < 3; ++ky) {
                    for (int kx = 0; kx < 3; ++kx) {
                        const std::size_t row0 = plane_off + kx;
                        if (want_param_grads) {
                            const double* pp = pad.data() + row0;
                            double wsum = 0.0;
                            for (int oy = 0; oy < OH; ++oy) {
                                const double* srow = pp + static_cast<std::size_t>(oy * s + ky) * PW;
                                const double* grow = gop + static_cast<std::size_t>(oy) * OW;
                                if (s == 1) {
                                    for (int ox = 0; ox < OW; ++ox) wsum += grow[ox] * srow[ox];
                                } else {
                                    for (int ox = 0; ox < OW; ++ox) wsum += grow[ox] * srow[2 * ox];
                                }
                            }
                            grads.weights.at(oc, ic, ky, kx) += wsum;
                        }
                        if (want_input_grad) {
                            const double wv = layer.weights.at(oc, ic, ky, kx);
                            double* gp = gpad.data() + row0;
                            for (int oy = 0; oy < OH; ++oy) {
                                double* grow_p = gp + static_cast<std::size_t>(oy * s + ky) * PW;
                                const double* grow = gop + static_cast<std::size_t>(oy) * OW;
                                if (s == 1) {
                                    for (int ox = 0; ox < OW; ++ox) grow_p[ox] += wv * grow[ox];
                                } else {
                                    for (int ox = 0; ox < OW; ++ox) grow_p[2 * ox] += wv * grow[ox];
                                }
                            }
                        }
                    }
                }
            }
        }
        if (want_input_grad) {
            // fold mirrored borders back onto their source pixels
            for (int ic = 0; ic < Cin; ++ic) {
                const double* gp = gpad.data() + static_cast<std::size_t>(ic) * PH * PW;
                double* gi = grad_input.plane(bi, ic);
                for (int r = 0; r < PH; ++r) {
                    const int sy = reflect_index(r - 1, H);
                    const double* grow = gp + static_cast<std::size_t>(r) * PW;
                    double* irow = gi + static_cast<std::size_t>(sy) * W;
                    irow[reflect_index(-1, W)] += grow[0];
                    for (int x = 0; x < W; ++x) irow[x] += grow[x + 1];
                    irow[reflect_index(W, W)] += grow[PW - 1];
                }
            }
        }
    }
    return grad_input;
}

Tensor relu_forward(const Tensor& x) {
    Tensor out = x;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return out;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
    if (!x.same_shape(grad_out)) {
        throw std::invalid_argument("relu_backward: shape mismatch");
    }
    Tensor out = grad_out;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        if (x.data[i] <= 0.0) out.data[i] = 0.0;
    }
    return out;
}

Tensor pixel_shuffle_x2(const Tensor& x) {
    if (x.c % 4 != 0) {
        throw std::invalid_argument("pixel_shuffle_x2: channels not divisible by 4");
    }
    Tensor out(x.b, x.c / 4, 2 * x.h, 2 * x.w);
    for (int bi = 0; bi < x.b; ++bi) {
        for (int k = 0; k < out.c; ++k) {
            for (int dy = 0; dy < 2; ++dy) {
                for (int dx = 0; dx < 2; ++dx) {
                    const double* src = x.plane(bi, 4 * k + 2 * dy + dx);
                    double* dst = out.plane(bi, k);
                    for (int y = 0; y < x.h; ++y) {
                        for (int xx = 0; xx < x.w; ++xx) {
                            dst[(2 * y + dy) * out.w + 2 * xx + dx] =
                                src[y * x.w + xx];
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor pixel_unshuffle_x2(const Tensor& x) {
    if (x.h % 2 != 0 || x.w % 2 != 0) {
        throw std::invalid_argument("pixel_unshuffle_x2: odd spatial dims");
    }
    Tensor out(x.b, x.c * 4, x.h / 2, x.w / 2);
    for (int bi = 0; bi < x.b; ++bi) {
        for (int k = 0; k < x.c; ++k) {
            for (int dy = 0; dy < 2; ++dy) {
                for (int dx = 0; dx < 2; ++dx) {
                    const double* src = x.plane(bi, k);
                    double* dst = out.plane(bi, 4 * k + 2 * dy + dx);
                    for (int y = 0; y < out.h; ++y) {
                        for (int xx = 0; xx < out.w; ++xx) {
                            dst[y * out.w + xx] =
                                src[(2 * y + dy) * x.w + 2 * xx + dx];
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor nearest_upsample_x2(const Tensor& x) {
    Tensor out(x.b, x.c, 2 * x.h, 2 * x.w);
    for (int bi = 0; bi < x.b; ++bi) {
        for (int ci = 0; ci < x.c; ++ci) {
            const double* src = x.plane(bi, ci);
            double* dst = out.plane(bi, ci);
            for (int y = 0; y < out.h; ++y) {
                const double* srow = src + static_cast<std::size_t>(y / 2) * x.w;
                double* drow = dst + static_cast<std::size_t>(y) * out.w;
                for (int xx = 0; xx < out.w; ++xx) drow[xx] = srow[xx / 2];
            }
        }
    }
    return out;
}

Tensor nearest_upsample_x2_backward(const Tensor& grad_out) {
    if (grad_out.h % 2 != 0 || grad_out.w % 2 != 0) {
        throw std::invalid_argument("nearest_upsample_x2_backward: odd dims");
    }
    Tensor out(grad_out.b, grad_out.c, grad_out.h / 2, grad_out.w / 2);
    for (int bi = 0; bi < grad_out.b; ++bi) {
        for (int ci = 0; ci < grad_out.c; ++ci) {
            const double* src = grad_out.plane(bi, ci);
            double* dst = out.plane(bi, ci);
            for (int y = 0; y < grad_out.h; ++y) {
                const double* srow = src + static_cast<std::size_t>(y) * grad_out.w;
                double* drow = dst + static_cast<std::size_t>(y / 2) * out.w;
                for (int xx = 0; xx < grad_out.w; ++xx) drow[xx / 2] += srow[xx];
            }
        }
    }
    return out;
}

Tensor clamp01(const Tensor& x) {
    Tensor out = x;
    for (double& v : out.data) {
        if (v < 0.0) v = 0.0;
        else if (v > 1.0) v = 1.0;
    }
    return out;
}

Tensor clamp01_backward(const Tensor& pre_clamp, const Tensor& grad_out) {
    if (!pre_clamp.same_shape(grad_out)) {
        throw std::invalid_argument("clamp01_backward: shape mismatch");
    }
    Tensor out = grad_out;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double v = pre_clamp.data[i];
        if (v <= 0.0 || v >= 1.0) out.data[i] = 0.0;
    }
    return out;
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamMoments& moments, std::int64_t step_count,
               const AdamConfig& cfg) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("adam_step: param/grad size mismatch");
    }
    if (moments.m.size() != params.size()) {
        moments.m.assign(params.size(), 0.0);
        moments.v.assign(params.size(), 0.0);
    }
    const double t = static_cast<double>(step_count + 1);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        moments.m[i] = cfg.beta1 * moments.m[i] + (1.0 - cfg.beta1) * g;
        moments.v[i] = cfg.beta2 * moments.v[i] + (1.0 - cfg.beta2) * g * g;
        const double mhat = moments.m[i] / bc1;
        const double vhat = moments.v[i] / bc2;
        params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

void AdamState::init(const std::vector<ConvLayer*>& layers, const AdamConfig& c) {
    cfg = c;
    step_count = 0;
    weight_moments.assign(layers.size(), AdamMoments{});
    bias_moments.assign(layers.size(), AdamMoments{});
    for (std::size_t i = 0; i < layers.size(); ++i) {
        weight_moments[i].m.assign(layers[i]->weights.numel(), 0.0);
        weight_moments[i].v.assign(layers[i]->weights.numel(), 0.0);
        bias_moments[i].m.assign(layers[i]->bias.size(), 0.0);
        bias_moments[i].v.assign(layers[i]->bias.size(), 0.0);
    }
}

void AdamState::step(const std::vector<ConvLayer*>& layers,
                     const std::vector<ConvGrads>& grads) {
    if (layers.size() != grads.size() || layers.size() != weight_moments.size()) {
        throw std::invalid_argument("AdamState::step: layer/grad count mismatch");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        adam_step(layers[i]->weights.data, grads[i].weights.data,
                  weight_moments[i], step_count, cfg);
        adam_step(layers[i]->bias, grads[i].bias, bias_moments[i], step_count, cfg);
    }
    ++step_count;
}

void he_init(ConvLayer& layer, Rng& rng) {
    const double fan_in = static_cast<double>(layer.in_ch()) *
                          layer.weights.h * layer.weights.w;
    const double bound = std::sqrt(6.0 / fan_in);
    for (double& v : layer.weights.data) v = rng.uniform(-bound, bound);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
}

}  // namespace edgepress
