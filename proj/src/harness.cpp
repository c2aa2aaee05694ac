#include "edgepress/harness.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "edgepress/image_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace edgepress {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

int round_up(int v, int multiple) { return (v + multiple - 1) / multiple * multiple; }

std::string checkpoint_name(Mode mode, int qf) {
    return "ckpt_" + mode_name(mode) + "_qf" + std::to_string(qf) + ".bin";
}

json sidecar_for(const ModelPair& pair, const CropRecord& rec) {
    const std::string hash = checkpoint_hash_hex(checkpoint_bytes(pair));
    return json{{"mode", mode_name(pair.prn.mode)},
                {"orig_h", rec.orig_h},
                {"orig_w", rec.orig_w},
                {"qf", pair.qf},
                {"checkpoint_hash", hash}};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << text;
    if (!out) throw IoError(path + ": write failed");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string jsonl_line(const EpochLog& log, const TrainConfig& cfg) {
    json j{{"epoch", log.epoch}, {"loss_o", log.loss_o}, {"loss_r", log.loss_r},
           {"qf", cfg.qf},       {"mode", mode_name(cfg.mode)}, {"seed", cfg.seed}};
    return j.dump();
}

}  // namespace

DatasetManifest ingest(const std::string& dir, const std::string& split) {
    if (!fs::is_directory(dir)) {
        throw IoError(dir + ": not a directory");
    }
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
            files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());

    DatasetManifest manifest;
    manifest.root = dir;
    manifest.split = split;
    for (const std::string& path : files) {
        DatasetEntry e;
        e.path = path;
        e.stem = fs::path(path).stem().string();
        try {
            const Image img = read_netpbm(path);
            e.h = img.h;
            e.w = img.w;
        } catch (const IoError& err) {
            std::cerr << "ingest: skipping unreadable file: " << err.what() << "\n";
            continue;
        }
        const fs::path edge = fs::path(dir) / "edges" / (e.stem + ".pgm");
        if (fs::is_regular_file(edge)) e.edge_path = edge.string();
        manifest.entries.push_back(std::move(e));
    }
    if (manifest.entries.empty()) {
        throw IoError(dir + ": no valid PGM/PPM images found");
    }
    return manifest;
}

Image prepare(const Image& img, CropRecord& rec) {
    rec.orig_h = img.h;
    rec.orig_w = img.w;
    const int th = round_up(std::max(img.h, 1), 16);
    const int tw = round_up(std::max(img.w, 1), 16);
    if (th == img.h && tw == img.w) return img;
    Image out(th, tw);
    for (int y = 0; y < th; ++y)
        for (int x = 0; x < tw; ++x)
            out.at(y, x) = img.at(reflect_index(y, img.h), reflect_index(x, img.w));
    return out;
}

Image unprepare(const Image& img, const CropRecord& rec) {
    if (rec.orig_h > img.h || rec.orig_w > img.w) {
        throw std::invalid_argument("unprepare: crop record larger than image");
    }
    if (rec.is_noop(img.h, img.w)) return img;
    Image out(rec.orig_h, rec.orig_w);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) out.at(y, x) = img.at(y, x);
    return out;
}

Image crop_or_pad(const Image& img, int target_h, int target_w) {
    const int y0 = img.h > target_h ? (img.h - target_h) / 2 : 0;
    const int x0 = img.w > target_w ? (img.w - target_w) / 2 : 0;
    Image out(target_h, target_w);
    for (int y = 0; y < target_h; ++y)
        for (int x = 0; x < target_w; ++x)
            out.at(y, x) = img.at(reflect_index(y0 + y, img.h), reflect_index(x0 + x, img.w));
    return out;
}

EdgeMap crop_or_pad(const EdgeMap& map, int target_h, int target_w) {
    const int y0 = map.h > target_h ? (map.h - target_h) / 2 : 0;
    const int x0 = map.w > target_w ? (map.w - target_w) / 2 : 0;
    EdgeMap out(target_h, target_w, map.provenance);
    for (int y = 0; y < target_h; ++y)
        for (int x = 0; x < target_w; ++x)
            out.at(y, x) = map.at(reflect_index(y0 + y, map.h), reflect_index(x0 + x, map.w));
    return out;
}

void RunConfig::validate() const {
    train.validate();
    if (train_size < 16 || train_size % 16 != 0) {
        throw std::invalid_argument("RunConfig: train_size must be a positive multiple of 16");
    }
    if (checkpoint_every < 1) {
        throw std::invalid_argument("RunConfig: checkpoint_every must be >= 1");
    }
    if (edge_detector != "canny" && edge_detector != "external") {
        throw std::invalid_argument("RunConfig: edge_detector must be canny or external");
    }
    if (qf_sweep.empty()) throw std::invalid_argument("RunConfig: empty qf sweep");
    for (std::size_t i = 0; i < qf_sweep.size(); ++i) {
        if (qf_sweep[i] < 1 || qf_sweep[i] > 100) {
            throw std::invalid_argument("RunConfig: sweep qf out of [1,100]");
        }
        if (i > 0 && qf_sweep[i] <= qf_sweep[i - 1]) {
            throw std::invalid_argument("RunConfig: sweep qf values must be strictly increasing");
        }
    }
}

RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open config");
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "mode") cfg.train.mode = mode_from_name(value);
            else if (key == "qf") cfg.train.qf = std::stoi(value);
            else if (key == "epochs") cfg.train.epochs = std::stoi(value);
            else if (key == "iterations_per_module") cfg.train.iterations_per_module = std::stoi(value);
            else if (key == "batch_size") cfg.train.batch_size = std::stoi(value);
            else if (key == "lr") cfg.train.lr = std::stod(value);
            else if (key == "alpha") cfg.train.alpha = std::stod(value);
            else if (key == "warmup_epochs") cfg.train.warmup_epochs = std::stoi(value);
            else if (key == "seed") cfg.train.seed = std::stoull(value);
            else if (key == "pon_features") cfg.train.pon_features = std::stoi(value);
            else if (key == "pon_blocks") cfg.train.pon_blocks = std::stoi(value);
            else if (key == "pon_res_scale") cfg.train.pon_res_scale = std::stod(value);
            else if (key == "train_dir") cfg.train_dir = value;
            else if (key == "test_dir") cfg.test_dir = value;
            else if (key == "out_dir") cfg.out_dir = value;
            else if (key == "label") cfg.label = value;
            else if (key == "train_size") cfg.train_size = std::stoi(value);
            else if (key == "checkpoint_every") cfg.checkpoint_every = std::stoi(value);
            else if (key == "edge_detector") cfg.edge_detector = value;
            else if (key == "canny_sigma") cfg.canny.sigma = std::stod(value);
            else if (key == "canny_low") cfg.canny.low = std::stod(value);
            else if (key == "canny_high") cfg.canny.high = std::stod(value);
            else if (key == "qf_sweep") {
                cfg.qf_sweep.clear();
                std::istringstream ss(value);
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    cfg.qf_sweep.push_back(std::stoi(trim(tok)));
                }
            } else {
                throw std::invalid_argument("unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " +
                                        e.what());
        }
    }
    if (const char* env_seed = std::getenv("EDGEPRESS_SEED")) {
        cfg.train.seed = std::stoull(env_seed);
    }
    cfg.validate();
    return cfg;
}

std::vector<TrainingExample> load_training_set(const DatasetManifest& manifest,
                                               const RunConfig& cfg) {
    std::vector<TrainingExample> out;
    out.reserve(manifest.entries.size());
    for (const DatasetEntry& entry : manifest.entries) {
        TrainingExample ex;
        const Image raw = read_netpbm(entry.path);
        ex.image = crop_or_pad(raw, cfg.train_size, cfg.train_size);
        if (cfg.edge_detector == "external") {
            if (entry.edge_path.empty()) {
                throw IoError(entry.path + ": external edge map required but " +
                              "edges/" + entry.stem + ".pgm is missing");
            }
            const EdgeMap full = load_edge_map(entry.edge_path, raw.h, raw.w);
            ex.edges = crop_or_pad(full, cfg.train_size, cfg.train_size);
        } else {
            ex.edges = canny(ex.image, cfg.canny);
        }
        out.push_back(std::move(ex));
    }
    return out;
}

PipelineResult run_pipeline(const ModelPair& pair, const Image& original,
                            const Codec& codec) {
    CropRecord rec;
    const Image padded = prepare(original, rec);
    const Tensor y = prn_forward(pair.prn, to_tensor(padded));
    PipelineResult res;
    res.stream = codec.encode(to_image(y), CodecConfig{pair.qf});
    const Image fc = codec.decode(res.stream);
    const Tensor fhat = pon_forward(pair.pon, to_tensor(fc));
    res.reconstruction = unprepare(to_image(fhat), rec);
    return res;
}

void cmd_train(const std::string& config_path) {
    const RunConfig cfg = parse_run_config(config_path);
    if (cfg.train_dir.empty()) {
        throw std::invalid_argument("cmd_train: config must set train_dir");
    }
    fs::create_directories(cfg.out_dir);
    const DatasetManifest manifest = ingest(cfg.train_dir, "train");
    const std::vector<TrainingExample> data = load_training_set(manifest, cfg);

    const std::string tag = mode_name(cfg.train.mode) + "_qf" + std::to_string(cfg.train.qf);
    const std::string log_path = cfg.out_dir + "/train_" + tag + ".log.jsonl";
    std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
    if (!log) throw IoError(log_path + ": cannot open for writing");

    TrainHooks hooks;
    hooks.on_epoch = [&](const TrainState& state, const EpochLog& entry) {
        log << jsonl_line(entry, cfg.train) << "\n";
        log.flush();
        if (entry.epoch % cfg.checkpoint_every == 0) {
            save_checkpoint(cfg.out_dir + "/ckpt_" + tag + "_epoch" +
                                std::to_string(entry.epoch) + ".bin",
                            state.models);
        }
    };
    const JpegCodec codec;
    const TrainState state = train(data, cfg.train, codec, &hooks);
    save_checkpoint(cfg.out_dir + "/" + checkpoint_name(cfg.train.mode, cfg.train.qf),
                    state.models);
}

void cmd_compress(const std::string& ckpt_path, const std::string& input_path,
                  const std::string& output_path) {
    const ModelPair pair = load_checkpoint(ckpt_path);
    const Image original = read_netpbm(input_path);
    CropRecord rec;
    const Image padded = prepare(original, rec);
    const Tensor y = prn_forward(pair.prn, to_tensor(padded));
    const Bitstream bs = jpeg_encode(to_image(y), CodecConfig{pair.qf});
    write_bitstream(output_path, bs);
    write_text(output_path + ".json", sidecar_for(pair, rec).dump(2) + "\n");
}

void cmd_decompress(const std::string& ckpt_path, const std::string& input_path,
                    const std::string& output_path) {
    const ModelPair pair = load_checkpoint(ckpt_path);
    json sidecar;
    try {
        sidecar = json::parse(read_text(input_path + ".json"));
    } catch (const json::exception& e) {
        throw IoError(input_path + ".json: bad sidecar: " + e.what());
    }
    const std::string want_mode = sidecar.at("mode").get<std::string>();
    const std::string want_hash = sidecar.at("checkpoint_hash").get<std::string>();
    const std::string have_hash = checkpoint_hash_hex(checkpoint_bytes(pair));
    if (want_mode != mode_name(pair.prn.mode)) {
        throw std::invalid_argument("decompress refused: sidecar mode " + want_mode +
                                    " does not match checkpoint mode " +
                                    mode_name(pair.prn.mode));
    }
    if (want_hash != have_hash) {
        throw std::invalid_argument(
            "decompress refused: sidecar checkpoint hash mismatch (stream was "
            "produced by a different model)");
    }
    CropRecord rec;
    rec.orig_h = sidecar.at("orig_h").get<int>();
    rec.orig_w = sidecar.at("orig_w").get<int>();

    const Bitstream bs = read_bitstream(input_path);
    const Image fc = jpeg_decode(bs);
    const Tensor fhat = pon_forward(pair.pon, to_tensor(fc));
    write_pgm(output_path, unprepare(to_image(fhat), rec));
}

void cmd_evaluate(const std::string& ckpt_path, const std::string& data_dir,
                  const std::string& out_csv, bool msssim_db) {
    const ModelPair pair = load_checkpoint(ckpt_path);
    const DatasetManifest manifest = ingest(data_dir, "test");
    const JpegCodec codec;
    const CannyConfig edge_cfg;

    RDCurve per_image;
    RDPoint mean;
    for (const DatasetEntry& entry : manifest.entries) {
        const Image original = read_netpbm(entry.path);
        const PipelineResult res = run_pipeline(pair, original, codec);
        const RDPoint p =
            evaluate_pair(original, res.reconstruction, res.stream, edge_cfg, pair.qf);
        per_image.points.push_back(p);
        mean.bpp += p.bpp;
        mean.psnr += p.psnr;
        mean.ssim += p.ssim;
        mean.msssim += p.msssim;
        mean.psnrb += p.psnrb;
        mean.miou += p.miou;
    }
    const double n = static_cast<double>(per_image.points.size());
    mean.qf = pair.qf;
    mean.bpp /= n;
    mean.psnr /= n;
    mean.ssim /= n;
    mean.msssim /= n;
    mean.psnrb /= n;
    mean.miou /= n;

    // per-image rows followed by the aggregate row
    std::ostringstream out;
    RDCurve header_only;
    header_only.label = "";
    out << rd_curve_to_csv(header_only, msssim_db);
    for (std::size_t i = 0; i < per_image.points.size(); ++i) {
        RDCurve row;
        row.label = manifest.entries[i].stem;
        row.points.push_back(per_image.points[i]);
        const std::string csv = rd_curve_to_csv(row, msssim_db);
        out << csv.substr(csv.find('\n') + 1);
    }
    RDCurve mean_row;
    mean_row.label = "mean";
    mean_row.points.push_back(mean);
    const std::string csv = rd_curve_to_csv(mean_row, msssim_db);
    out << csv.substr(csv.find('\n') + 1);
    write_text(out_csv, out.str());
}

void cmd_bd(const std::string& curve_a_csv, const std::string& curve_b_csv,
            const std::string& out_json) {
    const RDCurve a = rd_curve_from_csv(read_text(curve_a_csv));
    const RDCurve b = rd_curve_from_csv(read_text(curve_b_csv));
    const BdReport rep = bd_report(a, b);
    write_text(out_json, bd_report_to_json(rep) + "\n");
}

void cmd_sweep(const std::string& config_path) {
    const RunConfig cfg = parse_run_config(config_path);
    if (cfg.train_dir.empty() || cfg.test_dir.empty()) {
        throw std::invalid_argument("cmd_sweep: config must set train_dir and test_dir");
    }
    fs::create_directories(cfg.out_dir);
    const DatasetManifest train_manifest = ingest(cfg.train_dir, "train");
    const std::vector<TrainingExample> data = load_training_set(train_manifest, cfg);
    const DatasetManifest test_manifest = ingest(cfg.test_dir, "test");
    const JpegCodec codec;

    RDCurve curve;
    curve.label = cfg.label + "-" + mode_name(cfg.train.mode);
    for (int qf : cfg.qf_sweep) {
        const std::string ckpt_path =
            cfg.out_dir + "/" + checkpoint_name(cfg.train.mode, qf);
        ModelPair pair;
        if (fs::is_regular_file(ckpt_path)) {
            pair = load_checkpoint(ckpt_path);
        } else {
            TrainConfig leg = cfg.train;
            leg.qf = qf;
            const TrainState state = train(data, leg, codec, nullptr);
            pair = state.models;
            save_checkpoint(ckpt_path, pair);
        }

        RDPoint mean;
        mean.qf = qf;
        for (const DatasetEntry& entry : test_manifest.entries) {
            const Image original = read_netpbm(entry.path);
            const PipelineResult res = run_pipeline(pair, original, codec);
            const RDPoint p = evaluate_pair(original, res.reconstruction, res.stream,
                                            cfg.canny, qf);
            mean.bpp += p.bpp;
            mean.psnr += p.psnr;
            mean.ssim += p.ssim;
            mean.msssim += p.msssim;
            mean.psnrb += p.psnrb;
            mean.miou += p.miou;
        }
        const double n = static_cast<double>(test_manifest.entries.size());
        mean.bpp /= n;
        mean.psnr /= n;
        mean.ssim /= n;
        mean.msssim /= n;
        mean.psnrb /= n;
        mean.miou /= n;
        curve.points.push_back(mean);
    }
    curve.validate();
    write_text(cfg.out_dir + "/curve_" + mode_name(cfg.train.mode) + ".csv",
               rd_curve_to_csv(curve));
}

}  // namespace edgepress
