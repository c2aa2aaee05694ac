#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "edgepress/image.hpp"

namespace edgepress {

/// JPEG quality factor theta in [1,100].
struct CodecConfig {
    int qf = 50;
};

/// 64 quantization steps; `zigzag[i]` is the entry for zigzag position i,
/// `natural(y,x)` the row-major view.
struct QuantTable {
    std::array<int, 64> zigzag{};

    int natural(int y, int x) const;
};

/// Serialized baseline-JPEG file (JFIF). Length in bits defines the rate.
struct Bitstream {
    std::vector<std::uint8_t> bytes;

    std::size_t bit_length() const { return bytes.size() * 8; }
};

/// Decoder failure; carries the byte offset where parsing stopped.
struct JpegError : std::runtime_error {
    std::size_t offset;
    JpegError(const std::string& msg, std::size_t off)
        : std::runtime_error(msg + " (byte offset " + std::to_string(off) + ")"),
          offset(off) {}
};

/// Annex-K luminance base table scaled by the IJG quality convention.
QuantTable quant_table_for(int qf);

/// Orthonormal 8x8 DCT-II in the JPEG convention (constant block v -> DC 8v).
void fdct8x8(const double block[64], double coeffs[64]);
void idct8x8(const double coeffs[64], double block[64]);

/// Baseline sequential grayscale encoder. Pixels are quantized to 8 bits,
/// edges replicated to 8-multiples, Annex-K Huffman tables, deterministic.
Bitstream jpeg_encode(const Image& img, const CodecConfig& cfg);

/// Decodes a baseline grayscale stream produced by a conforming encoder.
Image jpeg_decode(const Bitstream& bs);

/// Reference pipeline: pad -> level shift -> DCT -> quantize -> dequantize
/// -> IDCT -> unshift -> round/clamp -> crop, no entropy coding. The real
/// decoder must match it pixel for pixel.
Image jpeg_reference_roundtrip(const Image& img, const CodecConfig& cfg);

/// bits / original pixel count. CR-mode streams still divide by the
/// pre-pre-processing image dims.
double bits_per_pixel(const Bitstream& bs, int orig_h, int orig_w);

/// Codec abstraction so the training loop can swap the back-end.
class Codec {
public:
    virtual ~Codec() = default;
    virtual Bitstream encode(const Image& img, const CodecConfig& cfg) const = 0;
    virtual Image decode(const Bitstream& bs) const = 0;
};

class JpegCodec final : public Codec {
public:
    Bitstream encode(const Image& img, const CodecConfig& cfg) const override {
        return jpeg_encode(img, cfg);
    }
    Image decode(const Bitstream& bs) const override { return jpeg_decode(bs); }
};

void write_bitstream(const std::string& path, const Bitstream& bs);
Bitstream read_bitstream(const std::string& path);

}  // namespace edgepress
