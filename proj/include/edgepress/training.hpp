#pragma once

#include <functional>
#include <vector>

#include "edgepress/jpeg.hpp"
#include "edgepress/losses.hpp"
#include "edgepress/models.hpp"

namespace edgepress {

struct TrainConfig {
    Mode mode = Mode::FR;
    int qf = 10;
    int epochs = 50;
    int iterations_per_module = 5;
    int batch_size = 10;
    double lr = 1e-3;
    double alpha = 0.75;
    int warmup_epochs = 5;
    std::uint64_t seed = 1;
    int pon_features = 32;
    int pon_blocks = 4;
    double pon_res_scale = 0.1;

    void validate() const;
};

/// One training image with its fixed edge weight map (computed once from
/// the original image and held for all epochs).
struct TrainingExample {
    Image image;
    EdgeMap edges;
};

struct EpochLog {
    int epoch = 0;
    double loss_o = 0.0;  // PoN objective, Eq.-style MSE
    double loss_r = 0.0;  // PrN objective, edge-aware
};

struct TrainState {
    ModelPair models;
    AdamState opt_prn;
    AdamState opt_pon;
    int epoch = 0;
    std::vector<EpochLog> log;
};

struct TrainHooks {
    std::function<void(const TrainState&, const EpochLog&)> on_epoch;
};

TrainState init_train_state(const TrainConfig& cfg);

/// Seeded per-epoch permutation of the dataset.
std::vector<std::size_t> epoch_order(std::size_t n, Rng& shuffle_rng);

/// Joint warm-up: phi_1 and phi_2 minimize MSE of PoN(PrN(f)) against f
/// with no codec in the path, warmup_epochs x iterations_per_module steps.
void pretrain_autoencoder(TrainState& state, const std::vector<TrainingExample>& data,
                          const TrainConfig& cfg, Rng& shuffle_rng);

struct CodecPassResult {
    Image latent;      // Y
    Image codec_out;   // f_c
    Bitstream stream;
};

/// Forward-path codec prediction: Y = PrN(f), stream = encode(Y, qf),
/// f_c = decode(stream). The codec never appears in any backward pass.
CodecPassResult forward_codec_pass(const Image& f, const PrnModel& prn,
                                   const CodecConfig& cfg, const Codec& codec);

/// Codec pass over the whole dataset in index order.
std::vector<Image> codec_pass_all(const std::vector<TrainingExample>& data,
                                  const PrnModel& prn, int qf, const Codec& codec);

/// iterations_per_module Adam steps on phi_2 against (codec_out, f) pairs;
/// phi_1 frozen. Returns the mean batch loss across the steps.
double train_pon_epoch(TrainState& state, const std::vector<Image>& codec_outputs,
                       const std::vector<TrainingExample>& data,
                       const TrainConfig& cfg, const std::vector<std::size_t>& order);

/// iterations_per_module Adam steps on phi_1 through the codec-free
/// composition PoN(PrN(f)) with phi_2 frozen, edge-aware objective.
double train_prn_epoch(TrainState& state, const std::vector<TrainingExample>& data,
                       const TrainConfig& cfg, const std::vector<std::size_t>& order);

/// One full epoch: codec pass, PoN phase, PrN phase.
EpochLog run_training_epoch(TrainState& state, const std::vector<TrainingExample>& data,
                            const TrainConfig& cfg, const Codec& codec,
                            Rng& shuffle_rng);

/// Full progressive schedule: warm-up then per-epoch codec pass, PoN
/// update, PrN update. Deterministic under cfg.seed.
TrainState train(const std::vector<TrainingExample>& data, const TrainConfig& cfg,
                 const Codec& codec, const TrainHooks* hooks = nullptr);

}  // namespace edgepress
