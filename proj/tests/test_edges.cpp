#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "edgepress/edges.hpp"
#include "edgepress/image_io.hpp"
#include "test_util.hpp"

using namespace edgepress;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("constant image has no edges") {
    Image img(16, 16);
    for (double& v : img.pix) v = 0.42;
    const EdgeMap e = canny(img, CannyConfig{});
    for (auto v : e.mask) CHECK(v == 0);
    CHECK(edge_density(e) == 0.0);
}

TEST_CASE("vertical step produces a tight vertical edge band") {
    const int h = 32, w = 32, step = 16;
    Image img(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.at(y, x) = x < step ? 0.0 : 1.0;
    CannyConfig cfg;
    cfg.sigma = 1.0;
    cfg.low = 0.1;
    cfg.high = 0.3;
    const EdgeMap e = canny(img, cfg);

    int inside_band = 0, total = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!e.at(y, x)) continue;
            ++total;
            if (std::abs(x - step) <= 2 || std::abs(x - (step - 1)) <= 2) ++inside_band;
            CHECK(std::abs(x - step) <= 3);  // nothing far from the step
        }
    CHECK(total > 0);
    CHECK(inside_band == total);
}

TEST_CASE("inverted image yields the identical edge map") {
    const Image img = testutil::structured_image(32, 32, 17);
    Image inv(32, 32);
    for (std::size_t i = 0; i < img.numel(); ++i) inv.pix[i] = 1.0 - img.pix[i];
    const EdgeMap a = canny(img, CannyConfig{});
    const EdgeMap b = canny(inv, CannyConfig{});
    CHECK(a.mask == b.mask);
    CHECK(edge_density(a) > 0.0);
}

TEST_CASE("affine intensity remap leaves edges unchanged") {
    const Image img = testutil::structured_image(24, 40, 99);
    for (auto [a, b] : {std::pair{2.0, 0.0}, {0.5, 0.25}, {3.0, -0.5}}) {
        Image mapped(img.h, img.w);
        for (std::size_t i = 0; i < img.numel(); ++i) mapped.pix[i] = a * img.pix[i] + b;
        const EdgeMap e0 = canny(img, CannyConfig{});
        const EdgeMap e1 = canny(mapped, CannyConfig{});
        CHECK(e0.mask == e1.mask);
    }
}

TEST_CASE("canny rejects degenerate input and bad config") {
    Image tiny(4, 4);
    CHECK_THROWS_AS(canny(tiny, CannyConfig{}), std::invalid_argument);
    Image ok(8, 8);
    CannyConfig bad;
    bad.low = 0.5;
    bad.high = 0.2;
    CHECK_THROWS_AS(canny(ok, bad), std::invalid_argument);
}

TEST_CASE("load_edge_map binarizes at 0.5") {
    const auto path = temp_file("edgepress_edges_all255.pgm");
    Image white(4, 6);
    for (double& v : white.pix) v = 1.0;
    write_pgm(path.string(), white);
    const EdgeMap ones = load_edge_map(path.string(), 4, 6);
    for (auto v : ones.mask) CHECK(v == 1);
    CHECK(ones.provenance == EdgeProvenance::External);

    Image black(4, 6);
    write_pgm(path.string(), black);
    const EdgeMap zeros = load_edge_map(path.string(), 4, 6);
    for (auto v : zeros.mask) CHECK(v == 0);

    // soft map: 127 stays non-edge, 128 becomes edge
    Image soft(1, 2);
    soft.pix = {127.0 / 255.0, 128.0 / 255.0};
    write_pgm(path.string(), soft);
    const EdgeMap both = load_edge_map(path.string(), 1, 2);
    CHECK(both.mask[0] == 0);
    CHECK(both.mask[1] == 1);
    std::filesystem::remove(path);
}

TEST_CASE("load_edge_map validates dims and path") {
    const auto path = temp_file("edgepress_edges_64.pgm");
    Image img(64, 64);
    write_pgm(path.string(), img);
    CHECK_THROWS_AS(load_edge_map(path.string(), 32, 32), IoError);
    CHECK_THROWS_AS(load_edge_map("/nonexistent/nowhere.pgm", 8, 8), IoError);
    std::filesystem::remove(path);
}

TEST_CASE("save then load of a binary map is the identity") {
    auto g = testutil::rng_for(123);
    EdgeMap map(12, 18);
    for (auto& v : map.mask) v = testutil::unif(g) > 0.0 ? 1 : 0;
    const auto path = temp_file("edgepress_edges_roundtrip.pgm");
    save_edge_map(path.string(), map);
    const EdgeMap back = load_edge_map(path.string(), 12, 18);
    CHECK(back.mask == map.mask);
    std::filesystem::remove(path);
}

TEST_CASE("edge_density arithmetic") {
    EdgeMap map(8, 8);
    CHECK(edge_density(map) == 0.0);
    for (auto& v : map.mask) v = 1;
    CHECK(edge_density(map) == 1.0);
    for (auto& v : map.mask) v = 0;
    for (int i = 0; i < 16; ++i) map.mask[i] = 1;
    CHECK(edge_density(map) == 0.25);
}
