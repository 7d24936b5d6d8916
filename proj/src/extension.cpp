#include "extension.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace groupdet::detail {

std::vector<double> burg_coefficients(std::span<const double> x, int order) {
    const std::size_t n = x.size();
    order = std::clamp(order, 0, static_cast<int>(n) - 2);
    std::vector<double> f(x.begin(), x.end());
    std::vector<double> b(x.begin(), x.end());
    std::vector<double> a;
    a.reserve(static_cast<std::size_t>(std::max(order, 0)));
    for (int m = 0; m < order; ++m) {
        const std::size_t len = n - static_cast<std::size_t>(m) - 1;
        const double* ff = f.data() + m + 1;
        const double* bb = b.data() + m;
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            num += ff[i] * bb[i];
            den += ff[i] * ff[i] + bb[i] * bb[i];
        }
        const double k = den > 0.0 ? -2.0 * num / den : 0.0;

        std::vector<double> next(a.size() + 1);
        for (std::size_t i = 0; i < a.size(); ++i) next[i] = a[i] + k * a[a.size() - 1 - i];
        next.back() = k;
        a = std::move(next);

        std::vector<double> nf(len), nb(len);
        for (std::size_t i = 0; i < len; ++i) {
            nf[i] = ff[i] + k * bb[i];
            nb[i] = bb[i] + k * ff[i];
        }
        std::copy(nf.begin(), nf.end(), f.begin() + m + 1);
        std::copy(nb.begin(), nb.end(), b.begin() + m + 1);
    }
    return a;
}

namespace {

// Extends line[lo, lo+len) in place to fill [0, total) by forward prediction
// to the right and backward prediction (same coefficients, reversed) to the left.
void extend_line(double* line, std::size_t stride, int lo, int len, int total, int order, double bound) {
    std::vector<double> seq(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) seq[static_cast<std::size_t>(i)] = line[static_cast<std::size_t>(lo + i) * stride];
    const std::vector<double> a = burg_coefficients(seq, order);
    const std::size_t p = a.size();

    auto run = [&](std::vector<double> hist, int count, auto&& emit) {
        for (int c = 0; c < count; ++c) {
            double v = 0.0;
            for (std::size_t k = 0; k < p; ++k) v -= a[k] * hist[hist.size() - 1 - k];
            v = std::clamp(v, -bound, bound);
            emit(c, v);
            hist.push_back(v);
        }
    };

    const int right = total - lo - len;
    if (p == 0) {
        for (int c = 0; c < right; ++c) line[static_cast<std::size_t>(lo + len + c) * stride] = seq.back();
        for (int c = 0; c < lo; ++c) line[static_cast<std::size_t>(lo - 1 - c) * stride] = seq.front();
        return;
    }
    run(seq, right, [&](int c, double v) { line[static_cast<std::size_t>(lo + len + c) * stride] = v; });
    std::vector<double> rev(seq.rbegin(), seq.rend());
    run(std::move(rev), lo, [&](int c, double v) { line[static_cast<std::size_t>(lo - 1 - c) * stride] = v; });
}

}  // namespace

std::vector<double> predictive_extend(const RasterF32& frame, double mean, int W, int H, int px, int py,
                                      int order) {
    const int w = frame.width();
    const int h = frame.height();
    std::vector<double> grid(static_cast<std::size_t>(W) * H, 0.0);
    double peak = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double v = frame.at(x, y) - mean;
            grid[static_cast<std::size_t>(y + py) * W + x + px] = v;
            peak = std::max(peak, std::abs(v));
        }
    // Stable AR filters cannot grow, but estimation noise on short lines can
    // overshoot; keep predictions within twice the frame's excursion.
    const double bound = 2.0 * peak;

    for (int y = py; y < py + h; ++y)
        extend_line(grid.data() + static_cast<std::size_t>(y) * W, 1, px, w, W, order, bound);
    for (int x = 0; x < W; ++x)
        extend_line(grid.data() + x, static_cast<std::size_t>(W), py, h, H, order, bound);
    return grid;
}

}  // namespace groupdet::detail
