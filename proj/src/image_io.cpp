#include "edgepress/image_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

namespace edgepress {

namespace {

// netpbm token scanner: skips whitespace and '#' comments
int next_int(std::istream& in, const std::string& path) {
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
        } else if (!std::isspace(ch)) {
            break;
        }
    }
    if (ch == EOF || !std::isdigit(ch)) {
        throw IoError(path + ": malformed netpbm header");
    }
    int value = 0;
    do {
        value = value * 10 + (ch - '0');
        ch = in.get();
    } while (ch != EOF && std::isdigit(ch));
    return value;
}

double bt601_luma(double r, double g, double b) {
    return 0.299 * r + 0.587 * g + 0.114 * b;
}

}  // namespace

Image read_netpbm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open");

    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || (m1 != '2' && m1 != '3' && m1 != '5' && m1 != '6')) {
        throw IoError(path + ": not a supported netpbm file (need P2/P3/P5/P6)");
    }
    const bool color = (m1 == '3' || m1 == '6');
    const bool binary = (m1 == '5' || m1 == '6');

    const int w = next_int(in, path);
    const int h = next_int(in, path);
    const int maxval = next_int(in, path);
    if (w <= 0 || h <= 0) throw IoError(path + ": non-positive dimensions");
    if (maxval <= 0 || maxval > 255) {
        throw IoError(path + ": unsupported maxval " + std::to_string(maxval));
    }

    const std::size_t samples = static_cast<std::size_t>(w) * h * (color ? 3 : 1);
    std::vector<int> raw(samples);
    if (binary) {
        // a single whitespace byte separates header and raster
        std::vector<unsigned char> buf(samples);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(samples));
        if (static_cast<std::size_t>(in.gcount()) != samples) {
            throw IoError(path + ": truncated raster");
        }
        for (std::size_t i = 0; i < samples; ++i) raw[i] = buf[i];
    } else {
        for (std::size_t i = 0; i < samples; ++i) raw[i] = next_int(in, path);
    }

    Image img(h, w);
    const double scale = 1.0 / maxval;
    if (color) {
        for (std::size_t i = 0; i < img.numel(); ++i) {
            img.pix[i] = bt601_luma(raw[3 * i] * scale, raw[3 * i + 1] * scale,
                                    raw[3 * i + 2] * scale);
        }
    } else {
        for (std::size_t i = 0; i < img.numel(); ++i) img.pix[i] = raw[i] * scale;
    }
    return img;
}

void write_pgm(const std::string& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << "P5\n" << img.w << " " << img.h << "\n255\n";
    std::vector<unsigned char> buf(img.numel());
    for (std::size_t i = 0; i < img.numel(); ++i) {
        double v = img.pix[i];
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        buf[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError(path + ": write failed");
}

}  // namespace edgepress
