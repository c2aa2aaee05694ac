#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "edgepress/harness.hpp"
#include "edgepress/image_io.hpp"
#include "test_util.hpp"

using namespace edgepress;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) {
        path = fs::temp_directory_path() / name;
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

void write_ppm_red(const std::string& path, int h, int w) {
    std::ofstream out(path, std::ios::binary);
    out << "P6\n" << w << " " << h << "\n255\n";
    for (int i = 0; i < h * w; ++i) {
        out.put(static_cast<char>(255));
        out.put(static_cast<char>(0));
        out.put(static_cast<char>(0));
    }
}

}  // namespace

TEST_CASE("ingest finds images in sorted order and flags edge maps") {
    TempDir dir("edgepress_ingest");
    write_pgm(dir.str() + "/c.pgm", testutil::structured_image(16, 16, 1));
    write_pgm(dir.str() + "/a.pgm", testutil::structured_image(16, 16, 2));
    write_pgm(dir.str() + "/b.pgm", testutil::structured_image(16, 16, 3));
    fs::create_directories(dir.path / "edges");
    EdgeMap m(16, 16);
    save_edge_map((dir.path / "edges" / "b.pgm").string(), m);

    const DatasetManifest manifest = ingest(dir.str(), "train");
    REQUIRE(manifest.entries.size() == 3);
    CHECK(manifest.entries[0].stem == "a");
    CHECK(manifest.entries[1].stem == "b");
    CHECK(manifest.entries[2].stem == "c");
    CHECK(manifest.entries[0].edge_path.empty());
    CHECK(!manifest.entries[1].edge_path.empty());
    CHECK(manifest.entries[0].h == 16);
    CHECK(manifest.split == "train");
}

TEST_CASE("ingest rejects an empty directory and skips junk") {
    TempDir dir("edgepress_ingest_empty");
    CHECK_THROWS_AS(ingest(dir.str(), "test"), IoError);

    std::ofstream(dir.str() + "/garbage.pgm") << "not a pgm";
    write_pgm(dir.str() + "/ok.pgm", testutil::structured_image(8, 8, 4));
    const DatasetManifest manifest = ingest(dir.str(), "test");
    CHECK(manifest.entries.size() == 1);
}

TEST_CASE("PPM luminance follows BT.601") {
    TempDir dir("edgepress_ppm");
    write_ppm_red(dir.str() + "/red.ppm", 4, 4);
    const Image img = read_netpbm(dir.str() + "/red.ppm");
    // (255,0,0) -> 0.299
    for (double v : img.pix) CHECK(v == doctest::Approx(0.299).epsilon(1e-12));
}

TEST_CASE("prepare pads to multiples of 16 and unprepare inverts") {
    CropRecord rec;
    const Image a = testutil::structured_image(64, 64, 5);
    const Image pa = prepare(a, rec);
    CHECK(pa.h == 64);
    CHECK(pa.w == 64);
    CHECK(rec.is_noop(pa.h, pa.w));

    const Image b = testutil::structured_image(65, 70, 6);
    CropRecord rb;
    const Image pb = prepare(b, rb);
    CHECK(pb.h == 80);
    CHECK(pb.w == 80);
    const Image back = unprepare(pb, rb);
    REQUIRE(back.h == 65);
    REQUIRE(back.w == 70);
    for (std::size_t i = 0; i < b.numel(); ++i) CHECK(back.pix[i] == b.pix[i]);

    Image tiny(1, 1);
    tiny.pix[0] = 0.7;
    CropRecord rt;
    const Image pt = prepare(tiny, rt);
    CHECK(pt.h == 16);
    CHECK(pt.w == 16);
    for (double v : pt.pix) CHECK(v == 0.7);
    const Image tback = unprepare(pt, rt);
    CHECK(tback.h == 1);
    CHECK(tback.w == 1);
}

TEST_CASE("run config parsing, defaults, and seed override") {
    TempDir dir("edgepress_cfg");
    const std::string cfg_path = dir.str() + "/run.cfg";
    std::ofstream(cfg_path) << "mode = CR\n"
                            << "qf = 20\n"
                            << "# comment line\n"
                            << "epochs = 3\n"
                            << "alpha = 0.5\n"
                            << "qf_sweep = 10, 20, 30\n"
                            << "out_dir = " << dir.str() << "\n";
    const RunConfig cfg = parse_run_config(cfg_path);
    CHECK(cfg.train.mode == Mode::CR);
    CHECK(cfg.train.qf == 20);
    CHECK(cfg.train.epochs == 3);
    CHECK(cfg.train.alpha == 0.5);
    CHECK(cfg.qf_sweep == std::vector<int>{10, 20, 30});
    CHECK(cfg.train.batch_size == 10);   // defaults intact
    CHECK(cfg.train.iterations_per_module == 5);
    CHECK(cfg.train.lr == 0.001);

    setenv("EDGEPRESS_SEED", "424242", 1);
    const RunConfig cfg2 = parse_run_config(cfg_path);
    unsetenv("EDGEPRESS_SEED");
    CHECK(cfg2.train.seed == 424242u);

    std::ofstream(cfg_path) << "bogus_key = 1\n";
    CHECK_THROWS_AS(parse_run_config(cfg_path), std::invalid_argument);
}

TEST_CASE("compress/decompress round trip preserves dims; hash mismatch refuses") {
    TempDir dir("edgepress_cc");
    const ModelPair pair = make_model_pair(Mode::CR, 30, 7);
    const std::string ckpt = dir.str() + "/model.bin";
    save_checkpoint(ckpt, pair);

    const Image img = testutil::structured_image(40, 52, 8);  // not multiples of 16
    const std::string in_pgm = dir.str() + "/input.pgm";
    write_pgm(in_pgm, img);

    const std::string jpg = dir.str() + "/latent.jpg";
    cmd_compress(ckpt, in_pgm, jpg);
    CHECK(fs::is_regular_file(jpg));
    CHECK(fs::is_regular_file(jpg + ".json"));

    // the emitted .jpg is decodable on its own
    const Image latent = jpeg_decode(read_bitstream(jpg));
    CHECK(latent.h == 24);  // padded 48 halved by CR
    CHECK(latent.w == 32);  // padded 64 halved by CR

    const std::string out_pgm = dir.str() + "/recon.pgm";
    cmd_decompress(ckpt, jpg, out_pgm);
    const Image recon = read_netpbm(out_pgm);
    CHECK(recon.h == 40);
    CHECK(recon.w == 52);

    // a different checkpoint must be refused, and no output written
    const ModelPair other = make_model_pair(Mode::CR, 30, 8);
    const std::string other_ckpt = dir.str() + "/other.bin";
    save_checkpoint(other_ckpt, other);
    const std::string refused = dir.str() + "/refused.pgm";
    CHECK_THROWS_AS(cmd_decompress(other_ckpt, jpg, refused), std::invalid_argument);
    CHECK(!fs::exists(refused));
}

TEST_CASE("cmd_bd of a curve against itself reports zero deltas") {
    TempDir dir("edgepress_bd");
    RDCurve curve;
    curve.label = "self";
    for (int i = 0; i < 5; ++i) {
        RDPoint p;
        p.qf = 10 * (i + 1);
        p.bpp = 0.1 * (i + 1) * (i + 1);
        p.psnr = 28.0 + 2.0 * i;
        p.ssim = 0.9;
        p.msssim = 0.95;
        p.psnrb = p.psnr - 0.3;
        p.miou = 0.4;
        curve.points.push_back(p);
    }
    const std::string csv_path = dir.str() + "/curve.csv";
    std::ofstream(csv_path) << rd_curve_to_csv(curve);
    const std::string out = dir.str() + "/bd.json";
    cmd_bd(csv_path, csv_path, out);
    std::ifstream in(out);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("\"bd_psnr_db\":0") != std::string::npos);
    CHECK(text.find("\"bd_rate_percent\":0") != std::string::npos);
}

TEST_CASE("cmd_evaluate aggregate row is the mean and order-independent") {
    TempDir dir("edgepress_eval");
    const std::string data_dir = dir.str() + "/data";
    fs::create_directories(data_dir);
    // names chosen to land in different lexicographic orders vs creation
    write_pgm(data_dir + "/z_first_created.pgm", testutil::structured_image(32, 32, 9));
    write_pgm(data_dir + "/a_second_created.pgm", testutil::structured_image(32, 32, 10));
    write_pgm(data_dir + "/m_third.pgm", testutil::structured_image(32, 32, 11));

    const ModelPair pair = make_model_pair(Mode::FR, 40, 12);
    const std::string ckpt = dir.str() + "/model.bin";
    save_checkpoint(ckpt, pair);

    const std::string csv_path = dir.str() + "/eval.csv";
    cmd_evaluate(ckpt, data_dir, csv_path);

    std::ifstream in(csv_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);  // header
    double bpp_sum = 0.0, psnr_sum = 0.0;
    double mean_bpp = -1.0, mean_psnr = -1.0;
    int rows = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string label, qf, bpp, psnr_field;
        std::getline(row, label, ',');
        std::getline(row, qf, ',');
        std::getline(row, bpp, ',');
        std::getline(row, psnr_field, ',');
        if (label == "mean") {
            mean_bpp = std::stod(bpp);
            mean_psnr = std::stod(psnr_field);
        } else {
            bpp_sum += std::stod(bpp);
            psnr_sum += std::stod(psnr_field);
            ++rows;
        }
    }
    REQUIRE(rows == 3);
    CHECK(mean_bpp == doctest::Approx(bpp_sum / 3.0).epsilon(1e-12));
    CHECK(mean_psnr == doctest::Approx(psnr_sum / 3.0).epsilon(1e-12));
}

TEST_CASE("external edge maps are required when configured") {
    TempDir dir("edgepress_ext");
    const std::string data_dir = dir.str() + "/data";
    fs::create_directories(data_dir);
    write_pgm(data_dir + "/img.pgm", testutil::structured_image(32, 32, 13));

    RunConfig cfg;
    cfg.train_size = 32;
    cfg.edge_detector = "external";
    const DatasetManifest manifest = ingest(data_dir, "train");
    CHECK_THROWS_AS(load_training_set(manifest, cfg), IoError);

    fs::create_directories(data_dir + "/edges");
    EdgeMap map(32, 32, EdgeProvenance::External);
    for (std::size_t i = 0; i < map.mask.size(); i += 3) map.mask[i] = 1;
    save_edge_map(data_dir + "/edges/img.pgm", map);
    const DatasetManifest manifest2 = ingest(data_dir, "train");
    const auto data = load_training_set(manifest2, cfg);
    REQUIRE(data.size() == 1);
    CHECK(data[0].edges.mask == map.mask);
    CHECK(data[0].edges.provenance == EdgeProvenance::External);
}

TEST_CASE("load_training_set computes fixed canny maps at train size") {
    TempDir dir("edgepress_canny_set");
    const std::string data_dir = dir.str() + "/data";
    fs::create_directories(data_dir);
    write_pgm(data_dir + "/img.pgm", testutil::structured_image(48, 40, 14));

    RunConfig cfg;
    cfg.train_size = 32;
    const auto data = load_training_set(ingest(data_dir, "train"), cfg);
    REQUIRE(data.size() == 1);
    CHECK(data[0].image.h == 32);
    CHECK(data[0].image.w == 32);
    CHECK(data[0].edges.h == 32);
    CHECK(data[0].edges.provenance == EdgeProvenance::Canny);
}
