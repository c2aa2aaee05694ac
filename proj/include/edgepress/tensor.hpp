#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace edgepress {

/// Dense 4-D array in (batch, channels, height, width) row-major layout.
/// All training-time numerics run in double precision.
struct Tensor {
    int b = 0;
    int c = 0;
    int h = 0;
    int w = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int b_, int c_, int h_, int w_)
        : b(b_), c(c_), h(h_), w(w_),
          data(static_cast<std::size_t>(b_) * c_ * h_ * w_, 0.0) {
        if (b_ < 0 || c_ < 0 || h_ < 0 || w_ < 0) {
            throw std::invalid_argument("Tensor: negative dimension");
        }
    }

    std::size_t numel() const { return data.size(); }

    bool same_shape(const Tensor& o) const {
        return b == o.b && c == o.c && h == o.h && w == o.w;
    }

    double& at(int bi, int ci, int y, int x) {
        return data[((static_cast<std::size_t>(bi) * c + ci) * h + y) * w + x];
    }
    double at(int bi, int ci, int y, int x) const {
        return data[((static_cast<std::size_t>(bi) * c + ci) * h + y) * w + x];
    }

    double* plane(int bi, int ci) {
        return data.data() + (static_cast<std::size_t>(bi) * c + ci) * h * w;
    }
    const double* plane(int bi, int ci) const {
        return data.data() + (static_cast<std::size_t>(bi) * c + ci) * h * w;
    }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    void resize_as(int b_, int c_, int h_, int w_) {
        b = b_; c = c_; h = h_; w = w_;
        data.assign(static_cast<std::size_t>(b_) * c_ * h_ * w_, 0.0);
    }
};

inline Tensor zeros_like(const Tensor& t) { return Tensor(t.b, t.c, t.h, t.w); }

/// Index reflection without edge repetition (..., 2, 1, 0, 1, 2, ...).
/// Degenerates to 0 for single-element axes.
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

}  // namespace edgepress
