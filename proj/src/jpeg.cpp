#include "edgepress/jpeg.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "edgepress/image_io.hpp"

namespace edgepress {

namespace {

// natural index of each zigzag position (ITU-T T.81 figure 5)
constexpr int kZigzagToNatural[64] = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

// Annex K.1 luminance quantization base, natural (row-major) order
constexpr int kBaseLumaQuant[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

// Annex K.3.1 luminance DC Huffman spec
constexpr std::uint8_t kDcBits[16] = {0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
constexpr std::uint8_t kDcVals[12] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};

// Annex K.3.2 luminance AC Huffman spec
constexpr std::uint8_t kAcBits[16] = {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D};
constexpr std::uint8_t kAcVals[162] = {
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06,
    0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08,
    0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0, 0x24, 0x33, 0x62, 0x72,
    0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45,
    0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
    0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74, 0x75,
    0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3,
    0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
    0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9,
    0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
    0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4,
    0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA};

struct CosTable {
    double m[8][8];  // m[u][x] = 0.5 * C(u) * cos((2x+1) u pi / 16)
    CosTable() {
        for (int u = 0; u < 8; ++u) {
            const double cu = (u == 0) ? 1.0 / std::sqrt(2.0) : 1.0;
            for (int x = 0; x < 8; ++x) {
                m[u][x] = 0.5 * cu * std::cos((2 * x + 1) * u * M_PI / 16.0);
            }
        }
    }
};
const CosTable& cos_table() {
    static const CosTable t;
    return t;
}

int round_half_away(double v) {
    return static_cast<int>(v >= 0.0 ? std::floor(v + 0.5) : std::ceil(v - 0.5));
}

int bit_size(int v) {
    int a = v < 0 ? -v : v;
    int n = 0;
    while (a) {
        ++n;
        a >>= 1;
    }
    return n;
}

// ---- Huffman encoding ------------------------------------------------

struct HuffEncoder {
    std::uint16_t code[256];
    std::uint8_t len[256];

    HuffEncoder(const std::uint8_t* bits, const std::uint8_t* vals, int nvals) {
        std::memset(len, 0, sizeof(len));
        int k = 0;
        std::uint16_t c = 0;
        for (int l = 1; l <= 16; ++l) {
            for (int i = 0; i < bits[l - 1]; ++i) {
                if (k >= nvals) throw std::logic_error("huffman spec overflow");
                code[vals[k]] = c;
                len[vals[k]] = static_cast<std::uint8_t>(l);
                ++c;
                ++k;
            }
            c = static_cast<std::uint16_t>(c << 1);
        }
    }
};

struct BitWriter {
    std::vector<std::uint8_t>& out;
    std::uint32_t acc = 0;
    int nbits = 0;

    explicit BitWriter(std::vector<std::uint8_t>& o) : out(o) {}

    void put(std::uint32_t bits, int n) {
        acc = (acc << n) | (bits & ((1u << n) - 1));
        nbits += n;
        while (nbits >= 8) {
            const std::uint8_t byte = static_cast<std::uint8_t>(acc >> (nbits - 8));
            out.push_back(byte);
            if (byte == 0xFF) out.push_back(0x00);  // byte stuffing
            nbits -= 8;
        }
    }

    void finish() {
        if (nbits > 0) put(0x7F, 8 - nbits);  // pad with 1 bits
    }
};

// ---- shared block transforms ------------------------------------------

// level-shifted pixels -> quantized coefficients, zigzag order
void encode_block(const int pix8[64], const QuantTable& qt, int qzig[64]) {
    const CosTable& ct = cos_table();
    double shifted[64];
    for (int i = 0; i < 64; ++i) shifted[i] = pix8[i] - 128.0;
    double tmp[64], coef[64];
    // tmp = M * f
    for (int u = 0; u < 8; ++u)
        for (int y = 0; y < 8; ++y) {
            double acc = 0.0;
            for (int x = 0; x < 8; ++x) acc += ct.m[u][x] * shifted[x * 8 + y];
            tmp[u * 8 + y] = acc;
        }
    // coef = tmp * M^T
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
            double acc = 0.0;
            for (int y = 0; y < 8; ++y) acc += tmp[u * 8 + y] * ct.m[v][y];
            coef[u * 8 + v] = acc;
        }
    for (int i = 0; i < 64; ++i) {
        qzig[i] = round_half_away(coef[kZigzagToNatural[i]] / qt.zigzag[i]);
    }
}

// quantized coefficients (zigzag) -> reconstructed 8-bit pixels
void decode_block(const int qzig[64], const QuantTable& qt, int pix8[64]) {
    const CosTable& ct = cos_table();
    double coef[64] = {};
    for (int i = 0; i < 64; ++i) {
        coef[kZigzagToNatural[i]] = static_cast<double>(qzig[i]) * qt.zigzag[i];
    }
    double tmp[64];
    // tmp = M^T * F
    for (int x = 0; x < 8; ++x)
        for (int v = 0; v < 8; ++v) {
            double acc = 0.0;
            for (int u = 0; u < 8; ++u) acc += ct.m[u][x] * coef[u * 8 + v];
            tmp[x * 8 + v] = acc;
        }
    // pix = tmp * M
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y) {
            double acc = 0.0;
            for (int v = 0; v < 8; ++v) acc += tmp[x * 8 + v] * ct.m[v][y];
            int p = static_cast<int>(std::lround(acc + 128.0));
            if (p < 0) p = 0;
            if (p > 255) p = 255;
            pix8[x * 8 + y] = p;
        }
}

// 8-bit canvas with edge replication to 8-multiples
struct Canvas {
    int h = 0, w = 0;        // original dims
    int ph = 0, pw = 0;      // padded dims
    std::vector<int> pix;

    explicit Canvas(const Image& img) {
        h = img.h;
        w = img.w;
        ph = (h + 7) / 8 * 8;
        pw = (w + 7) / 8 * 8;
        pix.resize(static_cast<std::size_t>(ph) * pw);
        for (int y = 0; y < ph; ++y) {
            const int sy = y < h ? y : h - 1;
            for (int x = 0; x < pw; ++x) {
                const int sx = x < w ? x : w - 1;
                double v = img.pix[static_cast<std::size_t>(sy) * w + sx];
                if (v < 0.0) v = 0.0;
                if (v > 1.0) v = 1.0;
                pix[static_cast<std::size_t>(y) * pw + x] =
                    static_cast<int>(std::lround(v * 255.0));
            }
        }
    }
};

void put_u16(std::vector<std::uint8_t>& out, int v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

// ---- Huffman decoding ---------------------------------------------------

struct HuffDecoder {
    int mincode[17];
    int maxcode[17];  // -1 where no codes of that length
    int valptr[17];
    std::vector<std::uint8_t> vals;
    bool valid = false;

    void build(const std::uint8_t bits[16], std::vector<std::uint8_t> v) {
        vals = std::move(v);
        int code = 0, k = 0;
        for (int l = 1; l <= 16; ++l) {
            if (bits[l - 1] == 0) {
                mincode[l] = 0;
                maxcode[l] = -1;
                valptr[l] = k;
            } else {
                valptr[l] = k;
                mincode[l] = code;
                code += bits[l - 1];
                k += bits[l - 1];
                maxcode[l] = code - 1;
            }
            code <<= 1;
        }
        valid = true;
    }
};

struct ByteReader {
    const std::vector<std::uint8_t>& b;
    std::size_t pos = 0;

    explicit ByteReader(const std::vector<std::uint8_t>& bytes) : b(bytes) {}

    std::uint8_t u8() {
        if (pos >= b.size()) throw JpegError("truncated stream", pos);
        return b[pos++];
    }
    int u16be() {
        const int hi = u8();
        return (hi << 8) | u8();
    }
};

struct ScanBitReader {
    ByteReader& r;
    std::uint32_t acc = 0;
    int nbits = 0;

    explicit ScanBitReader(ByteReader& rd) : r(rd) {}

    int bit() {
        if (nbits == 0) {
            std::uint8_t byte = r.u8();
            if (byte == 0xFF) {
                const std::uint8_t next = r.u8();
                if (next != 0x00) {
                    // a real marker inside entropy data
                    if (next >= 0xD0 && next <= 0xD7) {
                        throw JpegError("unsupported mode: restart markers", r.pos);
                    }
                    throw JpegError("truncated entropy data", r.pos);
                }
            }
            acc = byte;
            nbits = 8;
        }
        --nbits;
        return (acc >> nbits) & 1;
    }

    int bits(int n) {
        int v = 0;
        for (int i = 0; i < n; ++i) v = (v << 1) | bit();
        return v;
    }

    int decode(const HuffDecoder& t) {
        int code = 0;
        for (int l = 1; l <= 16; ++l) {
            code = (code << 1) | bit();
            if (t.maxcode[l] >= 0 && code <= t.maxcode[l] && code >= t.mincode[l]) {
                return t.vals[t.valptr[l] + (code - t.mincode[l])];
            }
        }
        throw JpegError("invalid Huffman code", r.pos);
    }
};

int extend(int v, int size) {
    return v < (1 << (size - 1)) ? v - (1 << size) + 1 : v;
}

}  // namespace

int QuantTable::natural(int y, int x) const {
    const int nat = y * 8 + x;
    for (int i = 0; i < 64; ++i) {
        if (kZigzagToNatural[i] == nat) return zigzag[i];
    }
    throw std::logic_error("QuantTable::natural: bad index");
}

QuantTable quant_table_for(int qf) {
    if (qf < 1 || qf > 100) {
        throw std::invalid_argument("quality factor must be in [1,100], got " +
                                    std::to_string(qf));
    }
    const int scale = qf < 50 ? 5000 / qf : 200 - 2 * qf;
    QuantTable qt;
    for (int i = 0; i < 64; ++i) {
        int v = (kBaseLumaQuant[kZigzagToNatural[i]] * scale + 50) / 100;
        if (v < 1) v = 1;
        if (v > 255) v = 255;
        qt.zigzag[i] = v;
    }
    return qt;
}

void fdct8x8(const double block[64], double coeffs[64]) {
    const CosTable& ct = cos_table();
    double tmp[64];
    for (int u = 0; u < 8; ++u)
        for (int y = 0; y < 8; ++y) {
            double acc = 0.0;
            for (int x = 0; x < 8; ++x) acc += ct.m[u][x] * block[x * 8 + y];
            tmp[u * 8 + y] = acc;
        }
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
            double acc = 0.0;
            for (int y = 0; y < 8; ++y) acc += tmp[u * 8 + y] * ct.m[v][y];
            coeffs[u * 8 + v] = acc;
        }
}

void idct8x8(const double coeffs[64], double block[64]) {
    const CosTable& ct = cos_table();
    double tmp[64];
    for (int x = 0; x < 8; ++x)
        for (int v = 0; v < 8; ++v) {
            double acc = 0.0;
            for (int u = 0; u < 8; ++u) acc += ct.m[u][x] * coeffs[u * 8 + v];
            tmp[x * 8 + v] = acc;
        }
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y) {
            double acc = 0.0;
            for (int v = 0; v < 8; ++v) acc += tmp[x * 8 + v] * ct.m[v][y];
            block[x * 8 + y] = acc;
        }
}

Bitstream jpeg_encode(const Image& img, const CodecConfig& cfg) {
    if (img.h <= 0 || img.w <= 0) {
        throw std::invalid_argument("jpeg_encode: empty image");
    }
    const QuantTable qt = quant_table_for(cfg.qf);
    const Canvas canvas(img);

    Bitstream bs;
    std::vector<std::uint8_t>& out = bs.bytes;
    out.reserve(1024);

    // SOI
    out.push_back(0xFF);
    out.push_back(0xD8);
    // APP0 / JFIF 1.1
    out.push_back(0xFF);
    out.push_back(0xE0);
    put_u16(out, 16);
    const char jfif[5] = {'J', 'F', 'I', 'F', '\0'};
    out.insert(out.end(), jfif, jfif + 5);
    out.push_back(1);
    out.push_back(1);
    out.push_back(0);  // aspect-ratio units
    put_u16(out, 1);
    put_u16(out, 1);
    out.push_back(0);
    out.push_back(0);
    // DQT
    out.push_back(0xFF);
    out.push_back(0xDB);
    put_u16(out, 67);
    out.push_back(0x00);
    for (int i = 0; i < 64; ++i) out.push_back(static_cast<std::uint8_t>(qt.zigzag[i]));
    // SOF0, single 8-bit component, original dims
    out.push_back(0xFF);
    out.push_back(0xC0);
    put_u16(out, 11);
    out.push_back(8);
    put_u16(out, img.h);
    put_u16(out, img.w);
    out.push_back(1);
    out.push_back(1);     // component id
    out.push_back(0x11);  // 1x1 sampling
    out.push_back(0);     // quant table 0
    // DHT (DC then AC)
    out.push_back(0xFF);
    out.push_back(0xC4);
    put_u16(out, 2 + 1 + 16 + 12);
    out.push_back(0x00);
    out.insert(out.end(), kDcBits, kDcBits + 16);
    out.insert(out.end(), kDcVals, kDcVals + 12);
    out.push_back(0xFF);
    out.push_back(0xC4);
    put_u16(out, 2 + 1 + 16 + 162);
    out.push_back(0x10);
    out.insert(out.end(), kAcBits, kAcBits + 16);
    out.insert(out.end(), kAcVals, kAcVals + 162);
    // SOS
    out.push_back(0xFF);
    out.push_back(0xDA);
    put_u16(out, 8);
    out.push_back(1);
    out.push_back(1);
    out.push_back(0x00);  // DC table 0, AC table 0
    out.push_back(0);
    out.push_back(63);
    out.push_back(0);

    static const HuffEncoder dc_enc(kDcBits, kDcVals, 12);
    static const HuffEncoder ac_enc(kAcBits, kAcVals, 162);
    BitWriter bw(out);

    int pred = 0;
    int block[64], qzig[64];
    for (int by = 0; by < canvas.ph; by += 8) {
        for (int bx = 0; bx < canvas.pw; bx += 8) {
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    block[y * 8 + x] =
                        canvas.pix[static_cast<std::size_t>(by + y) * canvas.pw + bx + x];
            encode_block(block, qt, qzig);

            const int diff = qzig[0] - pred;
            pred = qzig[0];
            const int dsize = bit_size(diff);
            if (dsize > 11) throw std::logic_error("DC difference out of category range");
            bw.put(dc_enc.code[dsize], dc_enc.len[dsize]);
            if (dsize > 0) {
                const int bits = diff >= 0 ? diff : diff + (1 << dsize) - 1;
                bw.put(static_cast<std::uint32_t>(bits), dsize);
            }

            int run = 0;
            for (int k = 1; k < 64; ++k) {
                const int v = qzig[k];
                if (v == 0) {
                    ++run;
                    continue;
                }
                while (run >= 16) {
                    bw.put(ac_enc.code[0xF0], ac_enc.len[0xF0]);
                    run -= 16;
                }
                const int s = bit_size(v);
                if (s > 10) throw std::logic_error("AC coefficient out of category range");
                const int sym = (run << 4) | s;
                bw.put(ac_enc.code[sym], ac_enc.len[sym]);
                const int bits = v >= 0 ? v : v + (1 << s) - 1;
                bw.put(static_cast<std::uint32_t>(bits), s);
                run = 0;
            }
            if (run > 0) bw.put(ac_enc.code[0x00], ac_enc.len[0x00]);  // EOB
        }
    }
    bw.finish();

    out.push_back(0xFF);
    out.push_back(0xD9);
    return bs;
}

Image jpeg_decode(const Bitstream& bs) {
    ByteReader r(bs.bytes);
    if (r.u8() != 0xFF || r.u8() != 0xD8) {
        throw JpegError("missing SOI marker", 0);
    }

    QuantTable qtables[4];
    bool have_qtable[4] = {false, false, false, false};
    HuffDecoder dc_tables[4], ac_tables[4];
    int height = -1, width = -1;
    int comp_qtable = 0;
    int comp_dc = 0, comp_ac = 0;
    bool have_sof = false;

    while (true) {
        std::uint8_t m = r.u8();
        if (m != 0xFF) throw JpegError("expected marker", r.pos - 1);
        std::uint8_t code = r.u8();
        while (code == 0xFF) code = r.u8();  // fill bytes

        if (code == 0xD9) {
            throw JpegError("EOI before image data", r.pos - 2);
        } else if ((code >= 0xE0 && code <= 0xEF) || code == 0xFE) {
            const int len = r.u16be();
            if (len < 2) throw JpegError("bad segment length", r.pos - 2);
            for (int i = 0; i < len - 2; ++i) r.u8();
        } else if (code == 0xDB) {
            int remaining = r.u16be() - 2;
            while (remaining > 0) {
                const std::uint8_t pqtq = r.u8();
                if ((pqtq >> 4) != 0) {
                    throw JpegError("unsupported mode: 16-bit quant table", r.pos - 1);
                }
                const int tq = pqtq & 0x0F;
                if (tq > 3) throw JpegError("bad quant table id", r.pos - 1);
                for (int i = 0; i < 64; ++i) qtables[tq].zigzag[i] = r.u8();
                have_qtable[tq] = true;
                remaining -= 65;
            }
            if (remaining != 0) throw JpegError("bad DQT length", r.pos);
        } else if (code == 0xC4) {
            int remaining = r.u16be() - 2;
            while (remaining > 0) {
                const std::uint8_t tcth = r.u8();
                const int tc = tcth >> 4, th = tcth & 0x0F;
                if (tc > 1 || th > 3) throw JpegError("bad Huffman table spec", r.pos - 1);
                std::uint8_t bits[16];
                int total = 0;
                for (int i = 0; i < 16; ++i) {
                    bits[i] = r.u8();
                    total += bits[i];
                }
                std::vector<std::uint8_t> vals(total);
                for (int i = 0; i < total; ++i) vals[i] = r.u8();
                (tc == 0 ? dc_tables[th] : ac_tables[th]).build(bits, std::move(vals));
                remaining -= 1 + 16 + total;
            }
            if (remaining != 0) throw JpegError("bad DHT length", r.pos);
        } else if (code == 0xC0) {
            r.u16be();
            const int precision = r.u8();
            if (precision != 8) throw JpegError("unsupported mode: precision != 8", r.pos - 1);
            height = r.u16be();
            width = r.u16be();
            const int ncomp = r.u8();
            if (ncomp != 1) {
                throw JpegError("unsupported mode: only single-component grayscale",
                                r.pos - 1);
            }
            r.u8();  // component id
            r.u8();  // sampling factors (single component: ignored)
            comp_qtable = r.u8();
            have_sof = true;
        } else if (code == 0xC1 || code == 0xC2 || code == 0xC3 ||
                   (code >= 0xC5 && code <= 0xC7) || (code >= 0xC9 && code <= 0xCB) ||
                   (code >= 0xCD && code <= 0xCF)) {
            throw JpegError("unsupported mode: non-baseline SOF marker", r.pos - 1);
        } else if (code == 0xDD) {
            r.u16be();
            const int interval = r.u16be();
            if (interval != 0) {
                throw JpegError("unsupported mode: restart markers", r.pos - 2);
            }
        } else if (code == 0xDA) {
            if (!have_sof) throw JpegError("SOS before SOF", r.pos - 2);
            r.u16be();
            const int ns = r.u8();
            if (ns != 1) throw JpegError("unsupported mode: multi-component scan", r.pos - 1);
            r.u8();  // component selector
            const std::uint8_t tdta = r.u8();
            comp_dc = tdta >> 4;
            comp_ac = tdta & 0x0F;
            r.u8();  // Ss
            r.u8();  // Se
            r.u8();  // AhAl
            break;
        } else {
            throw JpegError("unexpected marker 0x" + std::to_string(code), r.pos - 1);
        }
    }

    if (height <= 0 || width <= 0) throw JpegError("bad frame dimensions", r.pos);
    if (!have_qtable[comp_qtable]) throw JpegError("missing quant table", r.pos);
    if (!dc_tables[comp_dc].valid || !ac_tables[comp_ac].valid) {
        throw JpegError("missing Huffman table", r.pos);
    }
    const QuantTable& qt = qtables[comp_qtable];
    const HuffDecoder& dct = dc_tables[comp_dc];
    const HuffDecoder& act = ac_tables[comp_ac];

    const int ph = (height + 7) / 8 * 8;
    const int pw = (width + 7) / 8 * 8;
    std::vector<int> canvas(static_cast<std::size_t>(ph) * pw);

    ScanBitReader sbr(r);
    int pred = 0;
    int qzig[64], pix[64];
    for (int by = 0; by < ph; by += 8) {
        for (int bx = 0; bx < pw; bx += 8) {
            std::memset(qzig, 0, sizeof(qzig));
            const int dsize = sbr.decode(dct);
            if (dsize > 11) throw JpegError("bad DC category", r.pos);
            const int diff = dsize ? extend(sbr.bits(dsize), dsize) : 0;
            pred += diff;
            qzig[0] = pred;
            for (int k = 1; k < 64;) {
                const int rs = sbr.decode(act);
                const int run = rs >> 4, size = rs & 0x0F;
                if (size == 0) {
                    if (run == 15) {
                        k += 16;
                        continue;
                    }
                    break;  // EOB
                }
                k += run;
                if (k > 63) throw JpegError("AC run past end of block", r.pos);
                qzig[k] = extend(sbr.bits(size), size);
                ++k;
            }
            decode_block(qzig, qt, pix);
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    canvas[static_cast<std::size_t>(by + y) * pw + bx + x] = pix[y * 8 + x];
        }
    }

    // expect EOI after the scan
    std::uint8_t m = r.u8();
    while (m != 0xFF) m = r.u8();
    std::uint8_t code = r.u8();
    while (code == 0xFF) code = r.u8();
    if (code != 0xD9) throw JpegError("expected EOI after scan", r.pos - 1);

    Image img(height, width);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            img.at(y, x) = canvas[static_cast<std::size_t>(y) * pw + x] / 255.0;
    return img;
}

Image jpeg_reference_roundtrip(const Image& img, const CodecConfig& cfg) {
    if (img.h <= 0 || img.w <= 0) {
        throw std::invalid_argument("jpeg_reference_roundtrip: empty image");
    }
    const QuantTable qt = quant_table_for(cfg.qf);
    const Canvas canvas(img);
    std::vector<int> recon(canvas.pix.size());
    int block[64], qzig[64], pix[64];
    for (int by = 0; by < canvas.ph; by += 8) {
        for (int bx = 0; bx < canvas.pw; bx += 8) {
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    block[y * 8 + x] =
                        canvas.pix[static_cast<std::size_t>(by + y) * canvas.pw + bx + x];
            encode_block(block, qt, qzig);
            decode_block(qzig, qt, pix);
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    recon[static_cast<std::size_t>(by + y) * canvas.pw + bx + x] =
                        pix[y * 8 + x];
        }
    }
    Image out(img.h, img.w);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            out.at(y, x) = recon[static_cast<std::size_t>(y) * canvas.pw + x] / 255.0;
    return out;
}

double bits_per_pixel(const Bitstream& bs, int orig_h, int orig_w) {
    if (orig_h <= 0 || orig_w <= 0) {
        throw std::invalid_argument("bits_per_pixel: zero-area dims");
    }
    return static_cast<double>(bs.bit_length()) /
           (static_cast<double>(orig_h) * orig_w);
}

void write_bitstream(const std::string& path, const Bitstream& bs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bs.bytes.data()),
              static_cast<std::streamsize>(bs.bytes.size()));
    if (!out) throw IoError(path + ": write failed");
}

Bitstream read_bitstream(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open");
    Bitstream bs;
    bs.bytes.assign(std::istreambuf_iterator<char>(in),
                    std::istreambuf_iterator<char>());
    return bs;
}

}  // namespace edgepress
