#pragma once

#include <optional>
#include <string>
#include <vector>

#include "edgepress/edges.hpp"
#include "edgepress/metrics.hpp"
#include "edgepress/training.hpp"

namespace edgepress {

struct DatasetEntry {
    std::string path;
    std::string stem;
    int w = 0;
    int h = 0;
    std::string edge_path;  // empty when no edges/<stem>.pgm exists
};

struct DatasetManifest {
    std::string root;
    std::string split;  // train | test
    std::vector<DatasetEntry> entries;
};

/// Scans a directory of PGM/PPM images in lexicographic order. Unreadable
/// files are reported on stderr and skipped; zero valid images aborts.
DatasetManifest ingest(const std::string& dir, const std::string& split);

struct CropRecord {
    int orig_h = 0;
    int orig_w = 0;

    bool is_noop(int h, int w) const { return orig_h == h && orig_w == w; }
};

/// Reflect-pads height/width up to the next multiple of 16 (covers CR
/// halving followed by 8x8 codec blocks). unprepare inverts exactly.
Image prepare(const Image& img, CropRecord& rec);
Image unprepare(const Image& img, const CropRecord& rec);

/// Center-crops larger images and reflect-pads smaller ones to the target.
Image crop_or_pad(const Image& img, int target_h, int target_w);
EdgeMap crop_or_pad(const EdgeMap& map, int target_h, int target_w);

struct RunConfig {
    TrainConfig train;
    std::string train_dir;
    std::string test_dir;
    std::string out_dir = ".";
    std::string label = "edgepress";
    int train_size = 64;
    int checkpoint_every = 1;
    std::vector<int> qf_sweep = {2, 5, 6, 10, 20, 30, 40, 50, 60, 80, 90, 100};
    std::string edge_detector = "canny";  // canny | external
    CannyConfig canny;

    void validate() const;
};

/// Flat key=value file, '#' comments. EDGEPRESS_SEED in the environment
/// overrides the configured seed.
RunConfig parse_run_config(const std::string& path);

/// Loads, normalizes to train_size, and attaches edge maps (built-in
/// detector on the prepared original, or ingested external maps).
std::vector<TrainingExample> load_training_set(const DatasetManifest& manifest,
                                               const RunConfig& cfg);

struct PipelineResult {
    Image reconstruction;  // original dims
    Bitstream stream;
};

/// prepare -> PrN -> codec -> PoN -> unprepare.
PipelineResult run_pipeline(const ModelPair& pair, const Image& original,
                            const Codec& codec);

void cmd_train(const std::string& config_path);
void cmd_compress(const std::string& ckpt_path, const std::string& input_path,
                  const std::string& output_path);
void cmd_decompress(const std::string& ckpt_path, const std::string& input_path,
                    const std::string& output_path);
void cmd_evaluate(const std::string& ckpt_path, const std::string& data_dir,
                  const std::string& out_csv, bool msssim_db = false);
void cmd_bd(const std::string& curve_a_csv, const std::string& curve_b_csv,
            const std::string& out_json);
void cmd_sweep(const std::string& config_path);

}  // namespace edgepress
