#include "edgepress/edges.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "edgepress/image_io.hpp"

namespace edgepress {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

Image gaussian_blur(const Image& img, double sigma) {
    const auto k = gaussian_kernel(sigma);
    const int radius = static_cast<int>(k.size() / 2);
    Image tmp(img.h, img.w), out(img.h, img.w);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * img.at(y, reflect_index(x + i, img.w));
            tmp.at(y, x) = acc;
        }
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k[i + radius] * tmp.at(reflect_index(y + i, img.h), x);
            out.at(y, x) = acc;
        }
    return out;
}

}  // namespace

EdgeMap canny(const Image& img, const CannyConfig& cfg) {
    if (img.h < 5 || img.w < 5) {
        throw std::invalid_argument("canny: image must be at least 5x5");
    }
    if (!(cfg.sigma > 0.0) || !(cfg.low > 0.0) || !(cfg.low < cfg.high) ||
        !(cfg.high <= 1.0)) {
        throw std::invalid_argument("canny: invalid config (need 0 < low < high <= 1, sigma > 0)");
    }
    const int h = img.h, w = img.w;

    // flat images short-circuit: relative thresholds would otherwise pick
    // up rounding noise from the blur
    const auto [mn, mx] = std::minmax_element(img.pix.begin(), img.pix.end());
    if (*mn == *mx) return EdgeMap(h, w, EdgeProvenance::Canny);

    const Image g = gaussian_blur(img, cfg.sigma);

    // Sobel
    std::vector<double> gx(static_cast<std::size_t>(h) * w);
    std::vector<double> gy(gx.size());
    std::vector<double> mag(gx.size());
    double max_mag = 0.0;
    auto at = [&](int y, int x) {
        return g.at(reflect_index(y, h), reflect_index(x, w));
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double sx = -at(y - 1, x - 1) + at(y - 1, x + 1) -
                              2 * at(y, x - 1) + 2 * at(y, x + 1) -
                              at(y + 1, x - 1) + at(y + 1, x + 1);
            const double sy = -at(y - 1, x - 1) - 2 * at(y - 1, x) - at(y - 1, x + 1) +
                              at(y + 1, x - 1) + 2 * at(y + 1, x) + at(y + 1, x + 1);
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            gx[i] = sx;
            gy[i] = sy;
            mag[i] = std::hypot(sx, sy);
            if (mag[i] > max_mag) max_mag = mag[i];
        }

    EdgeMap out(h, w, EdgeProvenance::Canny);
    if (max_mag == 0.0) return out;  // flat image

    // non-maximal suppression along the quantized gradient direction
    std::vector<double> nms(mag.size(), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (mag[i] == 0.0) continue;
            double angle = std::atan2(gy[i], gx[i]) * 180.0 / M_PI;
            if (angle < 0.0) angle += 180.0;
            int dy1, dx1;
            if (angle < 22.5 || angle >= 157.5) {
                dy1 = 0; dx1 = 1;            // horizontal gradient -> east/west
            } else if (angle < 67.5) {
                dy1 = 1; dx1 = 1;            // diagonal
            } else if (angle < 112.5) {
                dy1 = 1; dx1 = 0;            // vertical gradient -> north/south
            } else {
                dy1 = 1; dx1 = -1;           // anti-diagonal
            }
            auto mag_at = [&](int yy, int xx) -> double {
                if (yy < 0 || yy >= h || xx < 0 || xx >= w) return 0.0;
                return mag[static_cast<std::size_t>(yy) * w + xx];
            };
            if (mag[i] >= mag_at(y + dy1, x + dx1) && mag[i] >= mag_at(y - dy1, x - dx1)) {
                nms[i] = mag[i];
            }
        }

    // hysteresis: grow from strong seeds through weak pixels, 8-connected
    const double hi = cfg.high * max_mag;
    const double lo = cfg.low * max_mag;
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < nms.size(); ++i) {
        if (nms[i] >= hi && !out.mask[i]) {
            out.mask[i] = 1;
            stack.push_back(i);
            while (!stack.empty()) {
                const std::size_t j = stack.back();
                stack.pop_back();
                const int jy = static_cast<int>(j) / w, jx = static_cast<int>(j) % w;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int ny = jy + dy, nx = jx + dx;
                        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                        const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
                        if (!out.mask[n] && nms[n] >= lo) {
                            out.mask[n] = 1;
                            stack.push_back(n);
                        }
                    }
            }
        }
    }
    return out;
}

EdgeMap load_edge_map(const std::string& path, int expected_h, int expected_w) {
    Image img;
    try {
        img = read_netpbm(path);
    } catch (const IoError& e) {
        throw IoError(std::string("edge map ingestion failed: ") + e.what());
    }
    if (img.h != expected_h || img.w != expected_w) {
        throw IoError(path + ": edge map dims " + std::to_string(img.w) + "x" +
                      std::to_string(img.h) + " do not match expected " +
                      std::to_string(expected_w) + "x" + std::to_string(expected_h));
    }
    EdgeMap map(img.h, img.w, EdgeProvenance::External);
    for (std::size_t i = 0; i < img.numel(); ++i) {
        // threshold 0.5: 8-bit values > 127 become edges
        map.mask[i] = img.pix[i] > 0.5 ? 1 : 0;
    }
    return map;
}

void save_edge_map(const std::string& path, const EdgeMap& map) {
    Image img(map.h, map.w);
    for (std::size_t i = 0; i < img.numel(); ++i) {
        img.pix[i] = map.mask[i] ? 1.0 : 0.0;
    }
    write_pgm(path, img);
}

double edge_density(const EdgeMap& map) {
    if (map.mask.empty()) return 0.0;
    std::size_t ones = 0;
    for (std::uint8_t v : map.mask) ones += v;
    return static_cast<double>(ones) / static_cast<double>(map.mask.size());
}

}  // namespace edgepress
