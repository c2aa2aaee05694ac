#include "edgepress/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace edgepress {

namespace {

constexpr double kPeak = 255.0;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

double mse_8bit(const Image& a, const Image& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        const double d = (a.pix[i] - b.pix[i]) * kPeak;
        acc += d * d;
    }
    return acc / static_cast<double>(a.numel());
}

std::vector<double> gaussian_window11() {
    std::vector<double> w(11 * 11);
    const double sigma = 1.5;
    double sum = 0.0;
    for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 11; ++x) {
            const double dy = y - 5, dx = x - 5;
            w[y * 11 + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            sum += w[y * 11 + x];
        }
    for (double& v : w) v /= sum;
    return w;
}

// mean luminance*cs term and mean cs term over all valid 11x11 windows
struct SsimSums {
    double ssim_mean = 0.0;
    double cs_mean = 0.0;
};

SsimSums ssim_sums(const Image& a, const Image& b) {
    static const std::vector<double> win = gaussian_window11();
    const int h = a.h, w = a.w;
    double ssim_acc = 0.0, cs_acc = 0.0;
    std::size_t count = 0;
    for (int y = 0; y + 11 <= h; ++y) {
        for (int x = 0; x + 11 <= w; ++x) {
            double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
            for (int wy = 0; wy < 11; ++wy)
                for (int wx = 0; wx < 11; ++wx) {
                    const double wv = win[wy * 11 + wx];
                    const double va = a.at(y + wy, x + wx) * kPeak;
                    const double vb = b.at(y + wy, x + wx) * kPeak;
                    mu_a += wv * va;
                    mu_b += wv * vb;
                    aa += wv * va * va;
                    bb += wv * vb * vb;
                    ab += wv * va * vb;
                }
            const double var_a = aa - mu_a * mu_a;
            const double var_b = bb - mu_b * mu_b;
            const double cov = ab - mu_a * mu_b;
            const double lum = (2.0 * mu_a * mu_b + kC1) / (mu_a * mu_a + mu_b * mu_b + kC1);
            const double cs = (2.0 * cov + kC2) / (var_a + var_b + kC2);
            ssim_acc += lum * cs;
            cs_acc += cs;
            ++count;
        }
    }
    SsimSums s;
    s.ssim_mean = ssim_acc / static_cast<double>(count);
    s.cs_mean = cs_acc / static_cast<double>(count);
    return s;
}

Image downsample_2x2_mean(const Image& img) {
    Image out(img.h / 2, img.w / 2);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x)
            out.at(y, x) = 0.25 * (img.at(2 * y, 2 * x) + img.at(2 * y, 2 * x + 1) +
                                   img.at(2 * y + 1, 2 * x) + img.at(2 * y + 1, 2 * x + 1));
    return out;
}

void require_same_dims(const Image& a, const Image& b, const char* who) {
    if (!a.same_dims(b)) {
        throw std::invalid_argument(std::string(who) + ": dimension mismatch");
    }
}

}  // namespace

void RDCurve::validate() {
    std::sort(points.begin(), points.end(),
              [](const RDPoint& x, const RDPoint& y) { return x.bpp < y.bpp; });
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i].bpp > points[i - 1].bpp)) {
            throw std::invalid_argument("RDCurve: bpp values must be strictly increasing");
        }
    }
    for (const RDPoint& p : points) {
        if (!(p.bpp > 0.0)) throw std::invalid_argument("RDCurve: bpp must be positive");
    }
}

double psnr(const Image& a, const Image& b) {
    require_same_dims(a, b, "psnr");
    if (a.numel() == 0) throw std::invalid_argument("psnr: empty images");
    const double mse = mse_8bit(a, b);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(kPeak * kPeak / mse);
}

double ssim(const Image& a, const Image& b) {
    require_same_dims(a, b, "ssim");
    if (a.h < 11 || a.w < 11) {
        throw std::invalid_argument("ssim: images must be at least 11x11");
    }
    return ssim_sums(a, b).ssim_mean;
}

double ms_ssim(const Image& a, const Image& b) {
    require_same_dims(a, b, "ms_ssim");
    static const double kWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

    // deepest scale that still fits one 11x11 window
    int scales = 0;
    for (int s = 0, dim = std::min(a.h, a.w); s < 5 && dim >= 11; ++s, dim /= 2) {
        ++scales;
    }
    if (scales == 0) {
        throw std::invalid_argument("ms_ssim: images must be at least 11x11");
    }
    // one scale carries weight 1 after renormalization: the plain value
    if (scales == 1) return ssim_sums(a, b).ssim_mean;

    double wsum = 0.0;
    for (int s = 0; s < scales; ++s) wsum += kWeights[s];

    Image ca = a, cb = b;
    double result = 1.0;
    for (int s = 0; s < scales; ++s) {
        const double weight = kWeights[s] / wsum;
        const SsimSums sums = ssim_sums(ca, cb);
        // negative contrast-structure means would poison the fractional
        // powers; clamp like the common implementations do
        const double term = s + 1 == scales ? std::max(sums.ssim_mean, 0.0)
                                            : std::max(sums.cs_mean, 0.0);
        result *= std::pow(term, weight);
        if (s + 1 < scales) {
            ca = downsample_2x2_mean(ca);
            cb = downsample_2x2_mean(cb);
        }
    }
    return result;
}

double blocking_effect_factor(const Image& test, int block) {
    if (block < 2) throw std::invalid_argument("blocking_effect_factor: block must be >= 2");
    if (test.h < block || test.w < block) {
        throw std::invalid_argument("blocking_effect_factor: image smaller than one block");
    }
    const int h = test.h, w = test.w;

    double sum_b = 0.0, sum_bc = 0.0;
    std::size_t n_b = 0, n_bc = 0;

    // horizontal neighbors (x, x+1); boundary when x+1 is a block multiple
    for (int y = 0; y < h; ++y)
        for (int x = 0; x + 1 < w; ++x) {
            const double d = (test.at(y, x) - test.at(y, x + 1)) * kPeak;
            if ((x + 1) % block == 0) {
                sum_b += d * d;
                ++n_b;
            } else {
                sum_bc += d * d;
                ++n_bc;
            }
        }
    // vertical neighbors
    for (int y = 0; y + 1 < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double d = (test.at(y, x) - test.at(y + 1, x)) * kPeak;
            if ((y + 1) % block == 0) {
                sum_b += d * d;
                ++n_b;
            } else {
                sum_bc += d * d;
                ++n_bc;
            }
        }

    if (n_b == 0 || n_bc == 0) return 0.0;
    const double d_b = sum_b / static_cast<double>(n_b);
    const double d_bc = sum_bc / static_cast<double>(n_bc);
    if (d_b <= d_bc) return 0.0;
    const double eta = std::log2(static_cast<double>(block)) /
                       std::log2(static_cast<double>(std::min(h, w)));
    return eta * (d_b - d_bc);
}

double psnrb(const Image& reference, const Image& test, int block) {
    require_same_dims(reference, test, "psnrb");
    const double mse = mse_8bit(reference, test);
    const double bef = blocking_effect_factor(test, block);
    const double denom = mse + bef;
    if (denom == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(kPeak * kPeak / denom);
}

double miou(const EdgeMap& e1, const EdgeMap& e2) {
    if (e1.h != e2.h || e1.w != e2.w) {
        throw std::invalid_argument("miou: dimension mismatch");
    }
    std::size_t inter_edge = 0, union_edge = 0, inter_bg = 0, union_bg = 0;
    for (std::size_t i = 0; i < e1.mask.size(); ++i) {
        const bool a = e1.mask[i] != 0, b = e2.mask[i] != 0;
        inter_edge += (a && b);
        union_edge += (a || b);
        inter_bg += (!a && !b);
        union_bg += (!a || !b);
    }
    const double iou_edge =
        union_edge == 0 ? 1.0
                        : static_cast<double>(inter_edge) / static_cast<double>(union_edge);
    const double iou_bg =
        union_bg == 0 ? 1.0
                      : static_cast<double>(inter_bg) / static_cast<double>(union_bg);
    return 0.5 * (iou_edge + iou_bg);
}

RDPoint evaluate_pair(const Image& original, const Image& reconstruction,
                      const Bitstream& bs, const CannyConfig& edge_cfg, int qf) {
    require_same_dims(original, reconstruction, "evaluate_pair");
    RDPoint p;
    p.qf = qf;
    p.bpp = bits_per_pixel(bs, original.h, original.w);
    p.psnr = psnr(original, reconstruction);
    p.ssim = ssim(original, reconstruction);
    p.msssim = ms_ssim(original, reconstruction);
    p.psnrb = psnrb(original, reconstruction);
    p.miou = miou(canny(original, edge_cfg), canny(reconstruction, edge_cfg));
    return p;
}

std::string rd_curve_to_csv(const RDCurve& curve, bool msssim_db) {
    std::ostringstream out;
    out.precision(17);
    out << "label,qf,bpp,psnr,ssim,msssim,psnrb,miou";
    if (msssim_db) out << ",msssim_db";
    out << "\n";
    for (const RDPoint& p : curve.points) {
        out << curve.label << "," << p.qf << "," << p.bpp << "," << p.psnr << ","
            << p.ssim << "," << p.msssim << "," << p.psnrb << "," << p.miou;
        if (msssim_db) out << "," << -10.0 * std::log10(p.msssim);
        out << "\n";
    }
    return out.str();
}

RDCurve rd_curve_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("rd_curve_from_csv: empty input");
    }
    if (line.rfind("label,qf,bpp,psnr,ssim,msssim,psnrb,miou", 0) != 0) {
        throw std::invalid_argument("rd_curve_from_csv: unexpected header: " + line);
    }
    RDCurve curve;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() < 8) {
            throw std::invalid_argument("rd_curve_from_csv: short row: " + line);
        }
        if (curve.label.empty()) curve.label = fields[0];
        RDPoint p;
        p.qf = std::stoi(fields[1]);
        p.bpp = std::stod(fields[2]);
        p.psnr = std::stod(fields[3]);
        p.ssim = std::stod(fields[4]);
        p.msssim = std::stod(fields[5]);
        p.psnrb = std::stod(fields[6]);
        p.miou = std::stod(fields[7]);
        curve.points.push_back(p);
    }
    curve.validate();
    return curve;
}

}  // namespace edgepress
