#pragma once

#include <string>
#include <vector>

#include "edgepress/nn.hpp"

namespace edgepress {

/// Compact-resolution (latent at half size) vs full-resolution operation.
enum class Mode : std::uint8_t { FR = 0, CR = 1 };

std::string mode_name(Mode m);
Mode mode_from_name(const std::string& name);

/// Pre-processing network phi_1: conv(64) -> ReLU -> conv(32) -> ReLU ->
/// conv(1), last layer stride 2 in CR mode. No normalization layers.
/// Output is clamped to [0,1] at the codec hand-off.
struct PrnModel {
    Mode mode = Mode::FR;
    ConvLayer l1;
    ConvLayer l2;
    ConvLayer l3;

    PrnModel() = default;
    explicit PrnModel(Mode m);
    PrnModel(Mode m, Rng& rng);

    std::vector<ConvLayer*> layers();
    std::vector<const ConvLayer*> layers() const;
};

struct PrnTape {
    Tensor input, z1, a1, z2, a2, y_raw;
};

/// Post-processing network phi_2, an EDSR-style trunk: head conv, B
/// residual blocks (conv-ReLU-conv, branch scaled by res_scale), tail
/// conv plus global trunk skip. CR mode upsamples with a conv to 4
/// channels and a x2 pixel shuffle; both modes end in a conv to 1
/// channel added onto the input (FR) or its nearest-neighbor x2 (CR).
struct PonModel {
    Mode mode = Mode::FR;
    int features = 32;
    int blocks = 4;
    double res_scale = 0.1;

    ConvLayer head;
    std::vector<ConvLayer> body;  // 2 convs per residual block
    ConvLayer tail;
    ConvLayer upsample;  // CR only
    ConvLayer output;

    PonModel() = default;
    PonModel(Mode m, int features_ = 32, int blocks_ = 4, double res_scale_ = 0.1);
    PonModel(Mode m, Rng& rng, int features_ = 32, int blocks_ = 4,
             double res_scale_ = 0.1);

    std::vector<ConvLayer*> layers();
    std::vector<const ConvLayer*> layers() const;
};

struct PonTape {
    Tensor input, h0;
    std::vector<Tensor> block_in, z, a, c;
    Tensor tail_in, tail_out, trunk;
    Tensor up4, shuffled, base;  // CR only
    Tensor y_raw;
};

/// f [0,1] -> latent Y [0,1]; CR halves the spatial dims (even dims
/// required), FR preserves them.
Tensor prn_forward(const PrnModel& model, const Tensor& f, PrnTape* tape = nullptr);

/// Accumulates parameter gradients (aligned with model.layers()).
void prn_backward(const PrnModel& model, const PrnTape& tape, const Tensor& grad_y,
                  std::vector<ConvGrads>& grads);

/// Codec output [0,1] -> reconstruction [0,1]; CR doubles the dims.
Tensor pon_forward(const PonModel& model, const Tensor& fc, PonTape* tape = nullptr);

/// Returns grad wrt the input when `want_input_grad`; accumulates
/// parameter gradients when `want_param_grads` (grads may be null then).
Tensor pon_backward(const PonModel& model, const PonTape& tape, const Tensor& grad_y,
                    std::vector<ConvGrads>* grads, bool want_input_grad,
                    bool want_param_grads);

std::size_t count_params(const std::vector<const ConvLayer*>& layers);
std::size_t count_params(const PrnModel& model);
std::size_t count_params(const PonModel& model);
std::size_t count_params(const PrnModel& prn, const PonModel& pon);

/// Trained pair plus the quality factor it was trained for.
struct ModelPair {
    PrnModel prn;
    PonModel pon;
    int qf = 10;
};

ModelPair make_model_pair(Mode mode, int qf, std::uint64_t seed,
                          int features = 32, int blocks = 4,
                          double res_scale = 0.1);

/// Versioned binary container: mode tag, layer dims, raw little-endian
/// f64 arrays. Byte-exact round trip.
std::vector<std::uint8_t> checkpoint_bytes(const ModelPair& pair);
ModelPair checkpoint_from_bytes(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const std::string& path, const ModelPair& pair);
ModelPair load_checkpoint(const std::string& path);

/// FNV-1a 64 over the serialized checkpoint, as 16 hex digits.
std::string checkpoint_hash_hex(const std::vector<std::uint8_t>& bytes);

}  // namespace edgepress
