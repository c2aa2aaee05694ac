#include "edgepress/models.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "edgepress/image_io.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace edgepress {

std::string mode_name(Mode m) { return m == Mode::FR ? "FR" : "CR"; }

Mode mode_from_name(const std::string& name) {
    if (name == "FR" || name == "fr") return Mode::FR;
    if (name == "CR" || name == "cr") return Mode::CR;
    throw std::invalid_argument("unknown mode '" + name + "' (expected CR or FR)");
}

PrnModel::PrnModel(Mode m)
    : mode(m),
      l1(64, 1, 1),
      l2(32, 64, 1),
      l3(1, 32, m == Mode::CR ? 2 : 1) {}

PrnModel::PrnModel(Mode m, Rng& rng) : PrnModel(m) {
    he_init(l1, rng);
    he_init(l2, rng);
    he_init(l3, rng);
    // The latent is clamped to [0,1] at the codec hand-off. A zero-centered
    // init leaves about half of it saturated with zero gradient (all of it
    // for flat inputs), so the producing layer starts small around 0.5.
    for (double& v : l3.weights.data) v *= 0.1;
    std::fill(l3.bias.begin(), l3.bias.end(), 0.5);
}

std::vector<ConvLayer*> PrnModel::layers() { return {&l1, &l2, &l3}; }
std::vector<const ConvLayer*> PrnModel::layers() const { return {&l1, &l2, &l3}; }

PonModel::PonModel(Mode m, int features_, int blocks_, double res_scale_)
    : mode(m), features(features_), blocks(blocks_), res_scale(res_scale_),
      head(features_, 1, 1),
      tail(features_, features_, 1) {
    body.reserve(2 * blocks);
    for (int i = 0; i < blocks; ++i) {
        body.emplace_back(features, features, 1);
        body.emplace_back(features, features, 1);
    }
    if (mode == Mode::CR) {
        upsample = ConvLayer(4, features, 1);
        output = ConvLayer(1, 1, 1);
    } else {
        output = ConvLayer(1, features, 1);
    }
}

PonModel::PonModel(Mode m, Rng& rng, int features_, int blocks_, double res_scale_)
    : PonModel(m, features_, blocks_, res_scale_) {
    for (ConvLayer* l : layers()) he_init(*l, rng);
}

std::vector<ConvLayer*> PonModel::layers() {
    std::vector<ConvLayer*> out;
    out.push_back(&head);
    for (ConvLayer& l : body) out.push_back(&l);
    out.push_back(&tail);
    if (mode == Mode::CR) out.push_back(&upsample);
    out.push_back(&output);
    return out;
}

std::vector<const ConvLayer*> PonModel::layers() const {
    std::vector<const ConvLayer*> out;
    out.push_back(&head);
    for (const ConvLayer& l : body) out.push_back(&l);
    out.push_back(&tail);
    if (mode == Mode::CR) out.push_back(&upsample);
    out.push_back(&output);
    return out;
}

Tensor prn_forward(const PrnModel& model, const Tensor& f, PrnTape* tape) {
    if (model.mode == Mode::CR && (f.h % 2 != 0 || f.w % 2 != 0)) {
        throw std::invalid_argument(
            "prn_forward: CR mode needs even dims, got " + std::to_string(f.w) +
            "x" + std::to_string(f.h) + " (pad first)");
    }
    PrnTape local;
    PrnTape& t = tape ? *tape : local;
    t.input = f;
    t.z1 = conv2d_forward(f, model.l1);
    t.a1 = relu_forward(t.z1);
    t.z2 = conv2d_forward(t.a1, model.l2);
    t.a2 = relu_forward(t.z2);
    t.y_raw = conv2d_forward(t.a2, model.l3);
    return clamp01(t.y_raw);
}

void prn_backward(const PrnModel& model, const PrnTape& tape, const Tensor& grad_y,
                  std::vector<ConvGrads>& grads) {
    if (grads.size() != 3) {
        throw std::invalid_argument("prn_backward: grads must hold 3 layers");
    }
    Tensor g = clamp01_backward(tape.y_raw, grad_y);
    g = conv2d_backward(tape.a2, model.l3, g, grads[2]);
    g = relu_backward(tape.z2, g);
    g = conv2d_backward(tape.a1, model.l2, g, grads[1]);
    g = relu_backward(tape.z1, g);
    conv2d_backward(tape.input, model.l1, g, grads[0], /*want_input_grad=*/false);
}

Tensor pon_forward(const PonModel& model, const Tensor& fc, PonTape* tape) {
    PonTape local;
    PonTape& t = tape ? *tape : local;
    t.input = fc;
    t.h0 = conv2d_forward(fc, model.head);

    t.block_in.assign(model.blocks, Tensor{});
    t.z.assign(model.blocks, Tensor{});
    t.a.assign(model.blocks, Tensor{});
    t.c.assign(model.blocks, Tensor{});

    Tensor cur = t.h0;
    for (int i = 0; i < model.blocks; ++i) {
        t.block_in[i] = cur;
        t.z[i] = conv2d_forward(cur, model.body[2 * i]);
        t.a[i] = relu_forward(t.z[i]);
        t.c[i] = conv2d_forward(t.a[i], model.body[2 * i + 1]);
        for (std::size_t j = 0; j < cur.numel(); ++j) {
            cur.data[j] += model.res_scale * t.c[i].data[j];
        }
    }
    t.tail_in = cur;
    t.tail_out = conv2d_forward(cur, model.tail);
    t.trunk = t.tail_out;
    for (std::size_t j = 0; j < t.trunk.numel(); ++j) t.trunk.data[j] += t.h0.data[j];

    if (model.mode == Mode::CR) {
        t.up4 = conv2d_forward(t.trunk, model.upsample);
        t.shuffled = pixel_shuffle_x2(t.up4);
        Tensor res = conv2d_forward(t.shuffled, model.output);
        t.base = nearest_upsample_x2(fc);
        t.y_raw = res;
        for (std::size_t j = 0; j < t.y_raw.numel(); ++j) {
            t.y_raw.data[j] += t.base.data[j];
        }
    } else {
        Tensor res = conv2d_forward(t.trunk, model.output);
        t.y_raw = res;
        for (std::size_t j = 0; j < t.y_raw.numel(); ++j) {
            t.y_raw.data[j] += fc.data[j];
        }
    }
    return clamp01(t.y_raw);
}

Tensor pon_backward(const PonModel& model, const PonTape& tape, const Tensor& grad_y,
                    std::vector<ConvGrads>* grads, bool want_input_grad,
                    bool want_param_grads) {
    const std::size_t nlayers = 2 + 2 * static_cast<std::size_t>(model.blocks) +
                                (model.mode == Mode::CR ? 2 : 1);
    if (want_param_grads && (!grads || grads->size() != nlayers)) {
        throw std::invalid_argument("pon_backward: grads size mismatch");
    }
    ConvGrads scratch;  // unused when want_param_grads is false
    auto grad_at = [&](std::size_t i) -> ConvGrads& {
        return want_param_grads ? (*grads)[i] : scratch;
    };
    const std::size_t idx_head = 0;
    const std::size_t idx_body0 = 1;
    const std::size_t idx_tail = 1 + 2 * static_cast<std::size_t>(model.blocks);
    const std::size_t idx_up = idx_tail + 1;
    const std::size_t idx_out = model.mode == Mode::CR ? idx_up + 1 : idx_tail + 1;

    Tensor gy_raw = clamp01_backward(tape.y_raw, grad_y);

    Tensor g_input_direct;  // residual path to the network input
    Tensor g_trunk;
    if (model.mode == Mode::CR) {
        Tensor g_shuffled = conv2d_backward(tape.shuffled, model.output, gy_raw,
                                            grad_at(idx_out), true, want_param_grads);
        Tensor g_up4 = pixel_unshuffle_x2(g_shuffled);
        g_trunk = conv2d_backward(tape.trunk, model.upsample, g_up4,
                                  grad_at(idx_up), true, want_param_grads);
        if (want_input_grad) g_input_direct = nearest_upsample_x2_backward(gy_raw);
    } else {
        g_trunk = conv2d_backward(tape.trunk, model.output, gy_raw,
                                  grad_at(idx_out), true, want_param_grads);
        if (want_input_grad) g_input_direct = gy_raw;
    }

    // trunk = tail_out + h0; the skip contributes g_trunk to h0 directly
    Tensor g_h0 = g_trunk;
    Tensor g_cur = conv2d_backward(tape.tail_in, model.tail, g_trunk,
                                   grad_at(idx_tail), true, want_param_grads);
    for (int i = model.blocks - 1; i >= 0; --i) {
        // block output = block input + res_scale * branch(block input)
        Tensor g_c = g_cur;
        for (double& v : g_c.data) v *= model.res_scale;
        Tensor g_a = conv2d_backward(tape.a[i], model.body[2 * i + 1], g_c,
                                     grad_at(idx_body0 + 2 * i + 1), true,
                                     want_param_grads);
        Tensor g_z = relu_backward(tape.z[i], g_a);
        Tensor g_branch = conv2d_backward(tape.block_in[i], model.body[2 * i], g_z,
                                          grad_at(idx_body0 + 2 * i), true,
                                          want_param_grads);
        for (std::size_t j = 0; j < g_cur.numel(); ++j) {
            g_cur.data[j] += g_branch.data[j];
        }
    }
    for (std::size_t j = 0; j < g_h0.numel(); ++j) g_h0.data[j] += g_cur.data[j];

    Tensor g_input = conv2d_backward(tape.input, model.head, g_h0, grad_at(idx_head),
                                     want_input_grad, want_param_grads);
    if (!want_input_grad) return Tensor{};
    for (std::size_t j = 0; j < g_input.numel(); ++j) {
        g_input.data[j] += g_input_direct.data[j];
    }
    return g_input;
}

std::size_t count_params(const std::vector<const ConvLayer*>& layers) {
    std::size_t total = 0;
    for (const ConvLayer* l : layers) total += l->param_count();
    return total;
}

std::size_t count_params(const PrnModel& model) { return count_params(model.layers()); }
std::size_t count_params(const PonModel& model) { return count_params(model.layers()); }
std::size_t count_params(const PrnModel& prn, const PonModel& pon) {
    return count_params(prn) + count_params(pon);
}

ModelPair make_model_pair(Mode mode, int qf, std::uint64_t seed, int features,
                          int blocks, double res_scale) {
    Rng rng(seed);
    ModelPair pair{PrnModel(mode, rng), PonModel(mode, rng, features, blocks, res_scale), qf};
    return pair;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint8_t buf[8];
    std::memcpy(buf, &v, 8);
    out.insert(out.end(), buf, buf + 8);
}

void put_layer(std::vector<std::uint8_t>& out, const ConvLayer& l) {
    put_u32(out, static_cast<std::uint32_t>(l.out_ch()));
    put_u32(out, static_cast<std::uint32_t>(l.in_ch()));
    put_u32(out, static_cast<std::uint32_t>(l.weights.h));
    put_u32(out, static_cast<std::uint32_t>(l.weights.w));
    put_u32(out, static_cast<std::uint32_t>(l.stride));
    for (double v : l.weights.data) put_f64(out, v);
    for (double v : l.bias) put_f64(out, v);
}

struct ByteCursor {
    const std::vector<std::uint8_t>& b;
    std::size_t pos = 0;

    std::uint8_t u8() {
        if (pos >= b.size()) throw std::invalid_argument("checkpoint: truncated");
        return b[pos++];
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return v;
    }
    double f64() {
        if (pos + 8 > b.size()) throw std::invalid_argument("checkpoint: truncated");
        double v;
        std::memcpy(&v, b.data() + pos, 8);
        pos += 8;
        return v;
    }
};

ConvLayer read_layer(ByteCursor& c) {
    const int out = static_cast<int>(c.u32());
    const int in = static_cast<int>(c.u32());
    const int kh = static_cast<int>(c.u32());
    const int kw = static_cast<int>(c.u32());
    const int stride = static_cast<int>(c.u32());
    if (kh != 3 || kw != 3 || out <= 0 || in <= 0) {
        throw std::invalid_argument("checkpoint: bad layer dims");
    }
    ConvLayer l(out, in, stride);
    for (double& v : l.weights.data) v = c.f64();
    for (double& v : l.bias) v = c.f64();
    return l;
}

constexpr char kMagic[4] = {'E', 'P', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::vector<std::uint8_t> checkpoint_bytes(const ModelPair& pair) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, kVersion);
    out.push_back(static_cast<std::uint8_t>(pair.prn.mode));
    out.push_back(0);
    out.push_back(0);
    out.push_back(0);
    put_u32(out, static_cast<std::uint32_t>(pair.qf));
    put_u32(out, static_cast<std::uint32_t>(pair.pon.features));
    put_u32(out, static_cast<std::uint32_t>(pair.pon.blocks));
    put_f64(out, pair.pon.res_scale);

    const auto prn_layers = pair.prn.layers();
    put_u32(out, static_cast<std::uint32_t>(prn_layers.size()));
    for (const ConvLayer* l : prn_layers) put_layer(out, *l);
    const auto pon_layers = pair.pon.layers();
    put_u32(out, static_cast<std::uint32_t>(pon_layers.size()));
    for (const ConvLayer* l : pon_layers) put_layer(out, *l);
    return out;
}

ModelPair checkpoint_from_bytes(const std::vector<std::uint8_t>& bytes) {
    ByteCursor c{bytes};
    for (char m : kMagic) {
        if (c.u8() != static_cast<std::uint8_t>(m)) {
            throw std::invalid_argument("checkpoint: bad magic");
        }
    }
    if (c.u32() != kVersion) throw std::invalid_argument("checkpoint: unknown version");
    const Mode mode = static_cast<Mode>(c.u8());
    c.u8();
    c.u8();
    c.u8();
    const int qf = static_cast<int>(c.u32());
    const int features = static_cast<int>(c.u32());
    const int blocks = static_cast<int>(c.u32());
    const double res_scale = c.f64();

    ModelPair pair;
    pair.qf = qf;
    pair.prn = PrnModel(mode);
    pair.pon = PonModel(mode, features, blocks, res_scale);

    const std::uint32_t n_prn = c.u32();
    auto prn_layers = pair.prn.layers();
    if (n_prn != prn_layers.size()) {
        throw std::invalid_argument("checkpoint: PrN layer count mismatch");
    }
    for (ConvLayer* l : prn_layers) *l = read_layer(c);
    const std::uint32_t n_pon = c.u32();
    auto pon_layers = pair.pon.layers();
    if (n_pon != pon_layers.size()) {
        throw std::invalid_argument("checkpoint: PoN layer count mismatch");
    }
    for (ConvLayer* l : pon_layers) *l = read_layer(c);
    if (c.pos != bytes.size()) {
        throw std::invalid_argument("checkpoint: trailing bytes");
    }
    return pair;
}

void save_checkpoint(const std::string& path, const ModelPair& pair) {
    const std::vector<std::uint8_t> bytes = checkpoint_bytes(pair);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(path + ": write failed");
}

ModelPair load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return checkpoint_from_bytes(bytes);
}

std::string checkpoint_hash_hex(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

}  // namespace edgepress
