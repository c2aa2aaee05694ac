#pragma once

#include <string>

#include "edgepress/image.hpp"

namespace edgepress {

/// Thresholds are fractions of the per-image maximum gradient magnitude,
/// which makes the detector invariant to positive affine intensity maps.
struct CannyConfig {
    double sigma = 1.4;
    double low = 0.1;
    double high = 0.3;
};

/// Gaussian blur, Sobel gradients, 8-direction non-maximal suppression,
/// hysteresis from high-threshold seeds through 8-connectivity.
EdgeMap canny(const Image& img, const CannyConfig& cfg);

/// Binarizes an 8-bit grayscale PGM soft edge map at 0.5 (values > 127)
/// and validates dims against the associated image.
EdgeMap load_edge_map(const std::string& path, int expected_h, int expected_w);

/// 8-bit binary PGM (P5), 0 or 255.
void save_edge_map(const std::string& path, const EdgeMap& map);

/// Fraction of 1-pixels.
double edge_density(const EdgeMap& map);

}  // namespace edgepress
