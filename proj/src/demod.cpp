#include "groupdet/demod.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "extension.hpp"
#include "fft.hpp"
#include "groupdet/parallel.hpp"

namespace groupdet {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Index into [0, n) reflecting about the first and last sample.
int fold(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n - 2;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - m;
}

// Phase advance per sample around `c`, from the centered sum of neighbour
// products. Exact for linear phase up to |omega| < pi.
double phase_step(const cplx* prev, const cplx& c, const cplx* next) {
    cplx p{0.0, 0.0};
    if (next) p += *next * std::conj(c);
    if (prev) p += c * std::conj(*prev);
    if (p == cplx{0.0, 0.0}) return 0.0;
    return std::arg(p);
}

void clamp_to_pi(double& u, double& v) {
    const double n = std::hypot(u, v);
    if (n > kPi) {
        u *= kPi / n;
        v *= kPi / n;
    }
}

struct Dominant {
    double mag = -1.0;
    int channel = 0;
    double fm = 1.0;
    double if_u = 0.0;
    double if_v = 0.0;

    bool beats(const Dominant& o) const {
        return mag > o.mag || (mag == o.mag && channel < o.channel);
    }
};

}  // namespace

RasterF32 AmFmField::if_magnitude() const {
    RasterF32 out(if_u.width(), if_u.height());
    auto u = if_u.values();
    auto v = if_v.values();
    auto o = out.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = static_cast<float>(std::hypot(u[i], v[i]));
    return out;
}

std::pair<RasterF32, RasterF32> phase_gradient(const RasterF32& resp_real, const RasterF32& resp_imag) {
    if (!resp_real.same_shape(resp_imag))
        throw Error(ErrorCode::DimensionMismatch, "real and imaginary response rasters differ in size");
    const int w = resp_real.width();
    const int h = resp_real.height();
    std::vector<cplx> g(resp_real.size());
    double max_mag = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = {resp_real.values()[i], resp_imag.values()[i]};
        max_mag = std::max(max_mag, std::abs(g[i]));
    }
    const double floor = 1e-6 * max_mag;

    RasterF32 fu(w, h);
    RasterF32 fv(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const cplx& c = g[i];
            if (max_mag == 0.0 || std::abs(c) < floor) continue;
            double u = phase_step(x > 0 ? &g[i - 1] : nullptr, c, x + 1 < w ? &g[i + 1] : nullptr);
            double v = phase_step(y > 0 ? &g[i - static_cast<std::size_t>(w)] : nullptr, c,
                                  y + 1 < h ? &g[i + static_cast<std::size_t>(w)] : nullptr);
            clamp_to_pi(u, v);
            fu.at(x, y) = static_cast<float>(u);
            fv.at(x, y) = static_cast<float>(v);
        }
    return {std::move(fu), std::move(fv)};
}

AmFmField dca_decompose(const RasterF32& frame, const FilterBank& bank, const DemodOptions& opts) {
    if (frame.width() != bank.frame_width() || frame.height() != bank.frame_height())
        throw Error(ErrorCode::DimensionMismatch,
                    "frame is " + std::to_string(frame.width()) + "x" + std::to_string(frame.height()) +
                        " but the filterbank was built for " + std::to_string(bank.frame_width()) + "x" +
                        std::to_string(bank.frame_height()));

    const int w = frame.width();
    const int h = frame.height();
    const int W = bank.fft_width();
    const int H = bank.fft_height();
    const int px = bank.pad_x();
    const int py = bank.pad_y();
    const std::size_t n_fft = static_cast<std::size_t>(W) * H;
    const std::size_t n_px = frame.size();

    double mean = 0.0;
    for (float v : frame.values()) mean += v;
    mean /= static_cast<double>(n_px);

    detail::ComplexBuffer spectrum(n_fft);
    if (opts.boundary == BoundaryExtension::LinearPrediction) {
        const std::vector<double> padded = detail::predictive_extend(frame, mean, W, H, px, py, opts.prediction_order);
        for (std::size_t i = 0; i < n_fft; ++i) spectrum[i] = padded[i];
    } else {
        for (int y = 0; y < H; ++y) {
            const int sy = fold(y - py, h);
            for (int x = 0; x < W; ++x) {
                const int sx = fold(x - px, w);
                spectrum[static_cast<std::size_t>(y) * W + x] = frame.at(sx, sy) - mean;
            }
        }
    }
    detail::fft2d_inplace(spectrum, W, H, false);

    const int n_channels = bank.size();
    const int workers = std::clamp(opts.threads, 1, n_channels);
    std::vector<std::vector<Dominant>> best(static_cast<std::size_t>(workers));
    const double inv_n = 1.0 / static_cast<double>(n_fft);

    parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t t) {
        auto& mine = best[t];
        mine.assign(n_px, Dominant{});
        detail::ComplexBuffer resp(n_fft);
        for (int k = static_cast<int>(t); k < n_channels; k += workers) {
            std::fill(resp.data(), resp.data() + n_fft, cplx{0.0, 0.0});
            for (const auto& tap : bank.taps(k)) resp[tap.bin] = spectrum[tap.bin] * static_cast<double>(tap.gain);
            detail::fft2d_inplace(resp, W, H, true);

            for (int y = 0; y < h; ++y) {
                const std::size_t base = static_cast<std::size_t>(y + py) * W + px;
                for (int x = 0; x < w; ++x) {
                    const std::size_t j = base + x;
                    const double mag = std::abs(resp[j]) * inv_n;
                    Dominant cand;
                    cand.mag = mag;
                    cand.channel = k;
                    Dominant& cur = mine[static_cast<std::size_t>(y) * w + x];
                    if (!cand.beats(cur)) continue;
                    const cplx c = resp[j];
                    cand.fm = mag > 0.0 ? std::clamp(c.real() * inv_n / mag, -1.0, 1.0) : 1.0;
                    cand.if_u = phase_step(&resp[j - 1], c, &resp[j + 1]);
                    cand.if_v = phase_step(&resp[j - static_cast<std::size_t>(W)], c,
                                           &resp[j + static_cast<std::size_t>(W)]);
                    cur = cand;
                }
            }
        }
    });

    // The (magnitude, -channel) order is total, so the merge result does not
    // depend on how channels were split between workers.
    std::vector<Dominant>& merged = best[0];
    for (std::size_t t = 1; t < best.size(); ++t)
        for (std::size_t i = 0; i < n_px; ++i)
            if (best[t][i].beats(merged[i])) merged[i] = best[t][i];

    double max_mag = 0.0;
    for (const auto& d : merged) max_mag = std::max(max_mag, d.mag);
    const double mag_floor = opts.magnitude_floor * max_mag;

    AmFmField out{RasterF32(w, h), RasterF32(w, h), RasterF32(w, h), RasterF32(w, h), ChannelRaster(w, h)};
    const FilterbankSpec& spec = bank.spec();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            Dominant d = merged[static_cast<std::size_t>(y) * w + x];
            if (max_mag == 0.0 || d.mag < mag_floor) {
                d.if_u = 0.0;
                d.if_v = 0.0;
            }
            clamp_to_pi(d.if_u, d.if_v);
            const double g = channel_gain_at(spec, d.channel, {d.if_u / (2.0 * kPi), d.if_v / (2.0 * kPi)});
            // Analytic channels capture half the energy of a real cosine.
            out.am.at(x, y) = static_cast<float>(2.0 * d.mag / std::max(g, opts.gain_floor));
            out.fm_cos.at(x, y) = static_cast<float>(d.fm);
            out.if_u.at(x, y) = static_cast<float>(d.if_u);
            out.if_v.at(x, y) = static_cast<float>(d.if_v);
            out.dominant_channel.at(x, y) = static_cast<std::uint16_t>(d.channel);
        }
    return out;
}

RasterF32 fm_image(const AmFmField& field) {
    RasterF32 out(field.fm_cos.width(), field.fm_cos.height());
    auto src = field.fm_cos.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = 0.5f * (src[i] + 1.0f);
    return out;
}

}  // namespace groupdet
