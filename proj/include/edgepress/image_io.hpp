#pragma once

#include <string>

#include "edgepress/image.hpp"

namespace edgepress {

/// File/ingestion failure; the message names the offending path.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Reads a netpbm image (P2/P5 grayscale, P3/P6 color). Color input is
/// reduced to luminance with BT.601 weights. maxval must be <= 255.
Image read_netpbm(const std::string& path);

/// Writes an 8-bit binary PGM (P5); values are rounded from [0,1].
void write_pgm(const std::string& path, const Image& img);

}  // namespace edgepress
