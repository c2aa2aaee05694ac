#include "edgepress/training.hpp"

#include <numeric>

namespace edgepress {

namespace {

constexpr std::uint64_t kShuffleStreamSalt = 0x9E3779B97F4A7C15ULL;

std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& order,
                                                   int batch_size) {
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t i = 0; i < order.size(); i += batch_size) {
        const std::size_t end = std::min(order.size(), i + batch_size);
        batches.emplace_back(order.begin() + i, order.begin() + end);
    }
    return batches;
}

void zero_grads(std::vector<ConvGrads>& grads) {
    for (ConvGrads& g : grads) {
        g.weights.fill(0.0);
        std::fill(g.bias.begin(), g.bias.end(), 0.0);
    }
}

std::vector<ConvGrads> make_grads(const std::vector<ConvLayer*>& layers) {
    std::vector<ConvGrads> grads;
    grads.reserve(layers.size());
    for (ConvLayer* l : layers) grads.emplace_back(*l);
    return grads;
}

}  // namespace

void TrainConfig::validate() const {
    if (qf < 1 || qf > 100) throw std::invalid_argument("TrainConfig: qf out of [1,100]");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: negative epochs");
    if (iterations_per_module < 0) {
        throw std::invalid_argument("TrainConfig: negative iterations_per_module");
    }
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("TrainConfig: alpha out of [0,1]");
    if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be positive");
    if (warmup_epochs < 0) throw std::invalid_argument("TrainConfig: negative warmup_epochs");
    if (pon_features < 1 || pon_blocks < 0) {
        throw std::invalid_argument("TrainConfig: bad PoN dimensions");
    }
}

TrainState init_train_state(const TrainConfig& cfg) {
    cfg.validate();
    TrainState state;
    state.models = make_model_pair(cfg.mode, cfg.qf, cfg.seed, cfg.pon_features,
                                   cfg.pon_blocks, cfg.pon_res_scale);
    AdamConfig adam;
    adam.lr = cfg.lr;
    state.opt_prn.init(state.models.prn.layers(), adam);
    state.opt_pon.init(state.models.pon.layers(), adam);
    return state;
}

std::vector<std::size_t> epoch_order(std::size_t n, Rng& shuffle_rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(order);
    return order;
}

void pretrain_autoencoder(TrainState& state, const std::vector<TrainingExample>& data,
                          const TrainConfig& cfg, Rng& shuffle_rng) {
    if (data.empty()) throw std::invalid_argument("pretrain_autoencoder: empty dataset");
    auto prn_layers = state.models.prn.layers();
    auto pon_layers = state.models.pon.layers();
    std::vector<ConvGrads> prn_grads = make_grads(prn_layers);
    std::vector<ConvGrads> pon_grads = make_grads(pon_layers);

    for (int epoch = 0; epoch < cfg.warmup_epochs; ++epoch) {
        const auto order = epoch_order(data.size(), shuffle_rng);
        const auto batches = make_batches(order, cfg.batch_size);
        for (int it = 0; it < cfg.iterations_per_module; ++it) {
            const auto& batch = batches[it % batches.size()];
            zero_grads(prn_grads);
            zero_grads(pon_grads);
            const double inv_n = 1.0 / static_cast<double>(batch.size());
            for (std::size_t k : batch) {
                const Tensor f = to_tensor(data[k].image);
                PrnTape pt;
                const Tensor y = prn_forward(state.models.prn, f, &pt);
                PonTape qt;
                const Tensor fhat = pon_forward(state.models.pon, y, &qt);
                LossResult loss = mse_loss(fhat, f);
                for (double& v : loss.grad.data) v *= inv_n;
                const Tensor gy = pon_backward(state.models.pon, qt, loss.grad,
                                               &pon_grads, true, true);
                prn_backward(state.models.prn, pt, gy, prn_grads);
            }
            state.opt_prn.step(prn_layers, prn_grads);
            state.opt_pon.step(pon_layers, pon_grads);
        }
    }
}

CodecPassResult forward_codec_pass(const Image& f, const PrnModel& prn,
                                   const CodecConfig& cfg, const Codec& codec) {
    CodecPassResult res;
    res.latent = to_image(prn_forward(prn, to_tensor(f)));
    res.stream = codec.encode(res.latent, cfg);
    res.codec_out = codec.decode(res.stream);
    return res;
}

std::vector<Image> codec_pass_all(const std::vector<TrainingExample>& data,
                                  const PrnModel& prn, int qf, const Codec& codec) {
    std::vector<Image> outputs;
    outputs.reserve(data.size());
    const CodecConfig cc{qf};
    for (const TrainingExample& ex : data) {
        outputs.push_back(forward_codec_pass(ex.image, prn, cc, codec).codec_out);
    }
    return outputs;
}

double train_pon_epoch(TrainState& state, const std::vector<Image>& codec_outputs,
                       const std::vector<TrainingExample>& data,
                       const TrainConfig& cfg, const std::vector<std::size_t>& order) {
    if (codec_outputs.size() != data.size()) {
        throw std::invalid_argument("train_pon_epoch: codec output count mismatch");
    }
    if (cfg.iterations_per_module == 0) return 0.0;
    auto pon_layers = state.models.pon.layers();
    std::vector<ConvGrads> pon_grads = make_grads(pon_layers);
    const auto batches = make_batches(order, cfg.batch_size);

    double loss_sum = 0.0;
    for (int it = 0; it < cfg.iterations_per_module; ++it) {
        const auto& batch = batches[it % batches.size()];
        zero_grads(pon_grads);
        const double inv_n = 1.0 / static_cast<double>(batch.size());
        double batch_loss = 0.0;
        for (std::size_t k : batch) {
            const Tensor fc = to_tensor(codec_outputs[k]);
            PonTape tape;
            const Tensor fhat = pon_forward(state.models.pon, fc, &tape);
            LossResult loss = mse_loss(fhat, to_tensor(data[k].image));
            batch_loss += loss.value * inv_n;
            for (double& v : loss.grad.data) v *= inv_n;
            pon_backward(state.models.pon, tape, loss.grad, &pon_grads,
                         /*want_input_grad=*/false, /*want_param_grads=*/true);
        }
        state.opt_pon.step(pon_layers, pon_grads);
        loss_sum += batch_loss;
    }
    return loss_sum / cfg.iterations_per_module;
}

double train_prn_epoch(TrainState& state, const std::vector<TrainingExample>& data,
                       const TrainConfig& cfg, const std::vector<std::size_t>& order) {
    if (cfg.iterations_per_module == 0) return 0.0;
    auto prn_layers = state.models.prn.layers();
    std::vector<ConvGrads> prn_grads = make_grads(prn_layers);
    const auto batches = make_batches(order, cfg.batch_size);
    const LossConfig loss_cfg{cfg.alpha};

    double loss_sum = 0.0;
    for (int it = 0; it < cfg.iterations_per_module; ++it) {
        const auto& batch = batches[it % batches.size()];
        zero_grads(prn_grads);
        const double inv_n = 1.0 / static_cast<double>(batch.size());
        double batch_loss = 0.0;
        for (std::size_t k : batch) {
            const Tensor f = to_tensor(data[k].image);
            PrnTape pt;
            const Tensor y = prn_forward(state.models.prn, f, &pt);
            PonTape qt;
            const Tensor fhat = pon_forward(state.models.pon, y, &qt);
            LossResult loss = edge_aware_loss(fhat, f, data[k].edges, loss_cfg);
            batch_loss += loss.value * inv_n;
            for (double& v : loss.grad.data) v *= inv_n;
            const Tensor gy = pon_backward(state.models.pon, qt, loss.grad, nullptr,
                                           /*want_input_grad=*/true,
                                           /*want_param_grads=*/false);
            prn_backward(state.models.prn, pt, gy, prn_grads);
        }
        state.opt_prn.step(prn_layers, prn_grads);
        loss_sum += batch_loss;
    }
    return loss_sum / cfg.iterations_per_module;
}

EpochLog run_training_epoch(TrainState& state, const std::vector<TrainingExample>& data,
                            const TrainConfig& cfg, const Codec& codec,
                            Rng& shuffle_rng) {
    const auto order = epoch_order(data.size(), shuffle_rng);
    const std::vector<Image> codec_outputs =
        codec_pass_all(data, state.models.prn, cfg.qf, codec);
    EpochLog log;
    log.epoch = state.epoch + 1;
    log.loss_o = train_pon_epoch(state, codec_outputs, data, cfg, order);
    log.loss_r = train_prn_epoch(state, data, cfg, order);
    state.epoch = log.epoch;
    state.log.push_back(log);
    return log;
}

TrainState train(const std::vector<TrainingExample>& data, const TrainConfig& cfg,
                 const Codec& codec, const TrainHooks* hooks) {
    if (data.empty()) throw std::invalid_argument("train: empty dataset");
    for (const TrainingExample& ex : data) {
        if (!ex.image.same_dims(data[0].image)) {
            throw std::invalid_argument("train: images must share dims (prepare first)");
        }
        if (!ex.edges.same_dims(ex.image)) {
            throw std::invalid_argument("train: edge map dims mismatch");
        }
    }
    TrainState state = init_train_state(cfg);
    Rng shuffle_rng(cfg.seed ^ kShuffleStreamSalt);
    pretrain_autoencoder(state, data, cfg, shuffle_rng);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const EpochLog log = run_training_epoch(state, data, cfg, codec, shuffle_rng);
        if (hooks && hooks->on_epoch) hooks->on_epoch(state, log);
    }
    return state;
}

}  // namespace edgepress
