#pragma once

#include <string>
#include <vector>

#include "edgepress/edges.hpp"
#include "edgepress/image.hpp"
#include "edgepress/jpeg.hpp"

namespace edgepress {

/// One rate-distortion sample. psnr/psnrb are +inf for identical inputs.
struct RDPoint {
    int qf = 0;
    double bpp = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
    double msssim = 0.0;
    double psnrb = 0.0;
    double miou = 0.0;
};

/// Ordered samples with strictly increasing bpp.
struct RDCurve {
    std::string label;
    std::vector<RDPoint> points;

    /// Sorts by bpp and rejects duplicates.
    void validate();
};

/// 10 log10(255^2 / MSE) on the 8-bit scale; +inf when MSE = 0.
double psnr(const Image& a, const Image& b);

/// Mean local SSIM, 11x11 Gaussian window sigma 1.5, C1=(0.01*255)^2,
/// C2=(0.03*255)^2, valid-window positions only. Needs dims >= 11.
double ssim(const Image& a, const Image& b);

/// 5-scale MS-SSIM with weights (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
/// and dyadic 2x2-mean downsampling. Small images use fewer scales with
/// the weights renormalized to sum 1.
double ms_ssim(const Image& a, const Image& b);

/// PSNR penalized by the Yim-Bovik blocking effect factor of the test
/// image: 10 log10(255^2 / (MSE + BEF)).
double psnrb(const Image& reference, const Image& test, int block = 8);

/// Blocking effect factor alone (8-bit scale), >= 0.
double blocking_effect_factor(const Image& test, int block = 8);

/// Two-class mean IoU over {edge, non-edge}; a class absent from both
/// maps counts as 1.
double miou(const EdgeMap& e1, const EdgeMap& e2);

/// Classic Bjontegaard deltas from least-squares cubic fits of PSNR vs
/// log10(bpp) (and the inverse mapping for BD-Rate), integrated over the
/// overlapping interval. bd_psnr(A, B) > 0 means B sits above A;
/// bd_rate(A, B) > 0 means B spends more bits (in percent).
double bd_psnr(const RDCurve& curve_a, const RDCurve& curve_b);
double bd_rate(const RDCurve& curve_a, const RDCurve& curve_b);

struct BdReport {
    std::string pair;
    double bd_psnr_db = 0.0;
    double bd_rate_percent = 0.0;
    double overlap_lo = 0.0;  // log10(bpp) overlap used for BD-PSNR
    double overlap_hi = 0.0;
};

BdReport bd_report(const RDCurve& curve_a, const RDCurve& curve_b);
std::string bd_report_to_json(const BdReport& report);

/// Fills every RDPoint field; mIoU compares detector output on both
/// images with the same configuration.
RDPoint evaluate_pair(const Image& original, const Image& reconstruction,
                      const Bitstream& bs, const CannyConfig& edge_cfg,
                      int qf);

/// CSV schema: label,qf,bpp,psnr,ssim,msssim,psnrb,miou. When
/// `msssim_db` is set an extra -10*log10(MS-SSIM) column is appended;
/// the raw column stays canonical.
std::string rd_curve_to_csv(const RDCurve& curve, bool msssim_db = false);
RDCurve rd_curve_from_csv(const std::string& text);

}  // namespace edgepress
