#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "edgepress/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"edgepress: codec-sandwich image compression with an edge-aware loss"};
    app.require_subcommand(1);

    std::string config_path;
    auto* train = app.add_subcommand("train", "train one model pair from a config file");
    train->add_option("--config", config_path, "key=value config file")->required();

    std::string ckpt, in_path, out_path;
    auto* compress = app.add_subcommand("compress", "compress an image to .jpg + sidecar");
    compress->add_option("--ckpt", ckpt, "checkpoint file")->required();
    compress->add_option("--in", in_path, "input PGM/PPM image")->required();
    compress->add_option("--out", out_path, "output .jpg (sidecar written next to it)")
        ->required();

    std::string d_ckpt, d_in, d_out;
    auto* decompress = app.add_subcommand("decompress", "reconstruct from .jpg + sidecar");
    decompress->add_option("--ckpt", d_ckpt, "checkpoint file")->required();
    decompress->add_option("--in", d_in, "input .jpg (expects <in>.json sidecar)")->required();
    decompress->add_option("--out", d_out, "output PGM")->required();

    std::string e_ckpt, e_data, e_out;
    bool e_msssim_db = false;
    auto* evaluate = app.add_subcommand("evaluate", "per-image metrics over a dataset");
    evaluate->add_option("--ckpt", e_ckpt, "checkpoint file")->required();
    evaluate->add_option("--data", e_data, "dataset directory")->required();
    evaluate->add_option("--out", e_out, "output CSV")->required();
    evaluate->add_flag("--msssim-db", e_msssim_db, "append a -10*log10(MS-SSIM) column");

    std::string bd_a, bd_b, bd_out;
    auto* bd = app.add_subcommand("bd", "Bjontegaard deltas between two curve CSVs");
    bd->add_option("--curve-a", bd_a, "reference curve CSV")->required();
    bd->add_option("--curve-b", bd_b, "test curve CSV")->required();
    bd->add_option("--out", bd_out, "output JSON report")->required();

    std::string sweep_config;
    auto* sweep = app.add_subcommand("sweep", "train-or-load per QF and emit an R-D curve");
    sweep->add_option("--config", sweep_config, "key=value config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            edgepress::cmd_train(config_path);
        } else if (compress->parsed()) {
            edgepress::cmd_compress(ckpt, in_path, out_path);
        } else if (decompress->parsed()) {
            edgepress::cmd_decompress(d_ckpt, d_in, d_out);
        } else if (evaluate->parsed()) {
            edgepress::cmd_evaluate(e_ckpt, e_data, e_out, e_msssim_db);
        } else if (bd->parsed()) {
            edgepress::cmd_bd(bd_a, bd_b, bd_out);
        } else if (sweep->parsed()) {
            edgepress::cmd_sweep(sweep_config);
        }
    } catch (const std::exception& e) {
        std::cerr << "edgepress: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
