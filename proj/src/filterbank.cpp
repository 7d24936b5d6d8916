#include "groupdet/filterbank.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"

namespace groupdet {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPadMargin = 96;
// Bins below this gain are left out of the sparse bank.
constexpr double kTapFloor = 1e-7;

// Gaussian sigma that puts the gain at `crossover` a half-step from the center.
double sigma_for_crossover(double step, double crossover) {
    return 0.5 * step / std::sqrt(2.0 * std::log(1.0 / crossover));
}

}  // namespace

double GaborChannel::center_radius() const { return std::hypot(center_freq_u, center_freq_v); }
double GaborChannel::orientation() const { return std::atan2(center_freq_v, center_freq_u); }

void FilterbankLayout::validate() const {
    auto fail = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
    if (num_scales < 1) fail("num_scales must be >= 1");
    if (num_orientations < 1) fail("num_orientations must be >= 1");
    if (num_scales * num_orientations > 65535) fail("too many channels");
    if (!(min_center_freq > 0.0)) fail("min_center_freq must be > 0");
    if (!(max_center_freq <= 0.5)) fail("max_center_freq must be <= 0.5 (Nyquist)");
    if (!(min_center_freq <= max_center_freq)) fail("min_center_freq must not exceed max_center_freq");
    if (num_scales > 1 && !(min_center_freq < max_center_freq))
        fail("min_center_freq must be below max_center_freq when num_scales > 1");
    if (!(radial_crossover > 0.0 && radial_crossover < 1.0)) fail("radial_crossover must lie in (0,1)");
    if (!(angular_crossover > 0.0 && angular_crossover < 1.0)) fail("angular_crossover must lie in (0,1)");
}

FilterbankLayout read_filterbank_layout(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open filterbank config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    FilterbankLayout layout;
    try {
        layout.num_scales = j.value("num_scales", layout.num_scales);
        layout.num_orientations = j.value("num_orientations", layout.num_orientations);
        layout.min_center_freq = j.value("min_center_freq", layout.min_center_freq);
        layout.max_center_freq = j.value("max_center_freq", layout.max_center_freq);
        layout.radial_crossover = j.value("radial_crossover", layout.radial_crossover);
        layout.angular_crossover = j.value("angular_crossover", layout.angular_crossover);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    layout.validate();
    return layout;
}

FilterbankSpec::FilterbankSpec(const FilterbankLayout& layout) : layout_(layout) {
    layout_.validate();
    const int ns = layout_.num_scales;
    const int no = layout_.num_orientations;
    const double octave_step =
        ns > 1 ? std::log2(layout_.max_center_freq / layout_.min_center_freq) / (ns - 1) : 1.0;
    const double sigma_r = sigma_for_crossover(octave_step, layout_.radial_crossover);
    const double sigma_a = sigma_for_crossover(kPi / no, layout_.angular_crossover);

    channels_.reserve(static_cast<std::size_t>(ns * no));
    for (int s = 0; s < ns; ++s) {
        const double radius = layout_.min_center_freq * std::exp2(s * octave_step);
        for (int o = 0; o < no; ++o) {
            const double theta = kPi * o / no;
            GaborChannel ch;
            ch.center_freq_u = radius * std::cos(theta);
            ch.center_freq_v = radius * std::sin(theta);
            ch.radial_bandwidth = sigma_r;
            ch.angular_bandwidth = sigma_a;
            ch.index = s * no + o;
            channels_.push_back(ch);
        }
    }
}

int FilterbankSpec::channel_index(int scale, int orientation) const {
    if (scale < 0 || scale >= layout_.num_scales || orientation < 0 || orientation >= layout_.num_orientations)
        throw Error(ErrorCode::IndexOutOfRange, "scale/orientation out of range");
    return scale * layout_.num_orientations + orientation;
}

namespace {

double gain(const GaborChannel& ch, double radius, double angle, double center_radius, double center_angle) {
    if (radius <= 0.0) return 0.0;
    const double lr = std::log2(radius / center_radius) / ch.radial_bandwidth;
    const double da = std::remainder(angle - center_angle, 2.0 * kPi) / ch.angular_bandwidth;
    return std::exp(-0.5 * (lr * lr + da * da));
}

}  // namespace

double channel_gain_at(const FilterbankSpec& spec, int channel_index, Frequency f) {
    if (channel_index < 0 || channel_index >= spec.size())
        throw Error(ErrorCode::IndexOutOfRange,
                    "channel index " + std::to_string(channel_index) + " out of range");
    const GaborChannel& ch = spec.channels()[static_cast<std::size_t>(channel_index)];
    return gain(ch, std::hypot(f.u, f.v), std::atan2(f.v, f.u), ch.center_radius(), ch.orientation());
}

int next_fast_size(int min_size) {
    for (int n = std::max(min_size, 1);; ++n) {
        int m = n;
        for (int p : {2, 3, 5, 7})
            while (m % p == 0) m /= p;
        if (m == 1) return n;
    }
}

const std::vector<FilterBank::Tap>& FilterBank::taps(int channel) const {
    if (channel < 0 || channel >= size())
        throw Error(ErrorCode::IndexOutOfRange, "channel index out of range");
    return taps_[static_cast<std::size_t>(channel)];
}

Frequency FilterBank::bin_frequency(int kx, int ky) const {
    // Bins at or past the midpoint are negative frequencies (Nyquist maps to -0.5).
    const int sx = kx >= (fft_w_ + 1) / 2 ? kx - fft_w_ : kx;
    const int sy = ky >= (fft_h_ + 1) / 2 ? ky - fft_h_ : ky;
    return {static_cast<double>(sx) / fft_w_, static_cast<double>(sy) / fft_h_};
}

double FilterBank::transfer_at_bin(int channel, int kx, int ky) const {
    return channel_gain_at(spec_, channel, bin_frequency(kx, ky));
}

FilterBank build_filterbank(int frame_w, int frame_h, const FilterbankSpec& spec) {
    if (frame_w < kMinFrameSize || frame_h < kMinFrameSize)
        throw Error(ErrorCode::FrameTooSmall,
                    "frame " + std::to_string(frame_w) + "x" + std::to_string(frame_h) +
                        " is smaller than the 16x16 minimum");
    FilterBank bank;
    bank.spec_ = spec;
    bank.frame_w_ = frame_w;
    bank.frame_h_ = frame_h;
    bank.fft_w_ = next_fast_size(frame_w + 2 * kPadMargin);
    bank.fft_h_ = next_fast_size(frame_h + 2 * kPadMargin);
    bank.pad_x_ = (bank.fft_w_ - frame_w) / 2;
    bank.pad_y_ = (bank.fft_h_ - frame_h) / 2;

    const int W = bank.fft_w_;
    const int H = bank.fft_h_;
    std::vector<double> radius(static_cast<std::size_t>(W) * H);
    std::vector<double> angle(radius.size());
    for (int ky = 0; ky < H; ++ky)
        for (int kx = 0; kx < W; ++kx) {
            const Frequency f = bank.bin_frequency(kx, ky);
            const std::size_t i = static_cast<std::size_t>(ky) * W + kx;
            radius[i] = std::hypot(f.u, f.v);
            angle[i] = std::atan2(f.v, f.u);
        }

    bank.taps_.resize(static_cast<std::size_t>(spec.size()));
    for (const GaborChannel& ch : spec.channels()) {
        auto& taps = bank.taps_[static_cast<std::size_t>(ch.index)];
        const double cr = ch.center_radius();
        const double ca = ch.orientation();
        for (std::size_t i = 0; i < radius.size(); ++i) {
            const double g = gain(ch, radius[i], angle[i], cr, ca);
            if (g >= kTapFloor) taps.push_back({static_cast<std::uint32_t>(i), static_cast<float>(g)});
        }
    }
    return bank;
}

}  // namespace groupdet
