#include <array>
#include <cmath>
#include <sstream>

#include "edgepress/metrics.hpp"

namespace edgepress {

namespace {

struct Cubic {
    std::array<double, 4> coeff{};  // in x - center
    double center = 0.0;
};

// least-squares cubic through >= 4 samples; x is centered for conditioning
Cubic fit_cubic(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    Cubic fit;
    for (double x : xs) fit.center += x;
    fit.center /= static_cast<double>(n);

    double pow_sums[7] = {};
    double rhs[4] = {};
    for (std::size_t i = 0; i < n; ++i) {
        const double x = xs[i] - fit.center;
        double p = 1.0;
        for (int j = 0; j < 7; ++j) {
            pow_sums[j] += p;
            if (j < 4) rhs[j] += ys[i] * p;
            p *= x;
        }
    }
    double a[4][5];
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) a[r][c] = pow_sums[r + c];
        a[r][4] = rhs[r];
    }
    // gaussian elimination with partial pivoting
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        }
        if (std::fabs(a[pivot][col]) < 1e-300) {
            throw std::invalid_argument("bd fit: singular normal equations");
        }
        if (pivot != col) {
            for (int c = 0; c < 5; ++c) std::swap(a[pivot][c], a[col][c]);
        }
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 5; ++c) a[r][c] -= f * a[col][c];
        }
    }
    for (int r = 3; r >= 0; --r) {
        double acc = a[r][4];
        for (int c = r + 1; c < 4; ++c) acc -= a[r][c] * fit.coeff[c];
        fit.coeff[r] = acc / a[r][r];
    }
    return fit;
}

double integrate(const Cubic& fit, double lo, double hi) {
    auto anti = [&](double x) {
        const double t = x - fit.center;
        return fit.coeff[0] * t + fit.coeff[1] * t * t / 2.0 +
               fit.coeff[2] * t * t * t / 3.0 + fit.coeff[3] * t * t * t * t / 4.0;
    };
    return anti(hi) - anti(lo);
}

struct Overlap {
    double lo, hi;
};

Overlap find_overlap(const std::vector<double>& xa, const std::vector<double>& xb) {
    double min_a = xa[0], max_a = xa[0];
    for (double v : xa) {
        min_a = std::min(min_a, v);
        max_a = std::max(max_a, v);
    }
    double min_b = xb[0], max_b = xb[0];
    for (double v : xb) {
        min_b = std::min(min_b, v);
        max_b = std::max(max_b, v);
    }
    Overlap o{std::max(min_a, min_b), std::min(max_a, max_b)};
    if (!(o.hi > o.lo)) {
        throw std::invalid_argument("bd: curves do not overlap");
    }
    return o;
}

// average of fit_b - fit_a over the overlapping x range
double mean_curve_gap(const std::vector<double>& xa, const std::vector<double>& ya,
                      const std::vector<double>& xb, const std::vector<double>& yb,
                      Overlap* out_overlap = nullptr) {
    if (xa.size() < 4 || xb.size() < 4) {
        throw std::invalid_argument("bd: each curve needs at least 4 points");
    }
    const Overlap o = find_overlap(xa, xb);
    if (out_overlap) *out_overlap = o;
    const Cubic fa = fit_cubic(xa, ya);
    const Cubic fb = fit_cubic(xb, yb);
    return (integrate(fb, o.lo, o.hi) - integrate(fa, o.lo, o.hi)) / (o.hi - o.lo);
}

void split_curve(const RDCurve& c, std::vector<double>& log_rate,
                 std::vector<double>& quality) {
    for (const RDPoint& p : c.points) {
        if (!(p.bpp > 0.0)) throw std::invalid_argument("bd: bpp must be positive");
        if (!std::isfinite(p.psnr)) {
            throw std::invalid_argument("bd: non-finite psnr in curve");
        }
        log_rate.push_back(std::log10(p.bpp));
        quality.push_back(p.psnr);
    }
}

}  // namespace

double bd_psnr(const RDCurve& curve_a, const RDCurve& curve_b) {
    std::vector<double> ra, qa, rb, qb;
    split_curve(curve_a, ra, qa);
    split_curve(curve_b, rb, qb);
    return mean_curve_gap(ra, qa, rb, qb);
}

double bd_rate(const RDCurve& curve_a, const RDCurve& curve_b) {
    std::vector<double> ra, qa, rb, qb;
    split_curve(curve_a, ra, qa);
    split_curve(curve_b, rb, qb);
    const double d = mean_curve_gap(qa, ra, qb, rb);
    return (std::pow(10.0, d) - 1.0) * 100.0;
}

BdReport bd_report(const RDCurve& curve_a, const RDCurve& curve_b) {
    std::vector<double> ra, qa, rb, qb;
    split_curve(curve_a, ra, qa);
    split_curve(curve_b, rb, qb);
    BdReport rep;
    rep.pair = curve_b.label + " vs " + curve_a.label;
    Overlap o{0.0, 0.0};
    rep.bd_psnr_db = mean_curve_gap(ra, qa, rb, qb, &o);
    rep.overlap_lo = o.lo;
    rep.overlap_hi = o.hi;
    rep.bd_rate_percent = (std::pow(10.0, mean_curve_gap(qa, ra, qb, rb)) - 1.0) * 100.0;
    return rep;
}

std::string bd_report_to_json(const BdReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "{\"pair\":\"" << report.pair << "\",\"bd_psnr_db\":" << report.bd_psnr_db
        << ",\"bd_rate_percent\":" << report.bd_rate_percent << ",\"overlap\":["
        << report.overlap_lo << "," << report.overlap_hi << "]}";
    return out.str();
}

}  // namespace edgepress
