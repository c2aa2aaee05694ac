#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgepress/tensor.hpp"

namespace edgepress {

/// Single-channel pixel grid with values in [0,1].
struct Image {
    int h = 0;
    int w = 0;
    std::vector<double> pix;

    Image() = default;
    Image(int h_, int w_) : h(h_), w(w_), pix(static_cast<std::size_t>(h_) * w_, 0.0) {
        if (h_ < 0 || w_ < 0) throw std::invalid_argument("Image: negative dims");
    }

    double& at(int y, int x) { return pix[static_cast<std::size_t>(y) * w + x]; }
    double at(int y, int x) const { return pix[static_cast<std::size_t>(y) * w + x]; }
    std::size_t numel() const { return pix.size(); }
    bool same_dims(const Image& o) const { return h == o.h && w == o.w; }
};

enum class EdgeProvenance : std::uint8_t { Canny, External };

/// Binary edge weight map (1 = edge) with the dims of its image.
struct EdgeMap {
    int h = 0;
    int w = 0;
    std::vector<std::uint8_t> mask;
    EdgeProvenance provenance = EdgeProvenance::Canny;

    EdgeMap() = default;
    EdgeMap(int h_, int w_, EdgeProvenance p = EdgeProvenance::Canny)
        : h(h_), w(w_), mask(static_cast<std::size_t>(h_) * w_, 0), provenance(p) {}

    std::uint8_t& at(int y, int x) { return mask[static_cast<std::size_t>(y) * w + x]; }
    std::uint8_t at(int y, int x) const { return mask[static_cast<std::size_t>(y) * w + x]; }
    bool same_dims(const Image& o) const { return h == o.h && w == o.w; }
};

inline Tensor to_tensor(const Image& img) {
    Tensor t(1, 1, img.h, img.w);
    t.data = img.pix;
    return t;
}

inline Image to_image(const Tensor& t) {
    if (t.b != 1 || t.c != 1) {
        throw std::invalid_argument("to_image: tensor must be 1x1xHxW");
    }
    Image img(t.h, t.w);
    img.pix = t.data;
    return img;
}

}  // namespace edgepress
