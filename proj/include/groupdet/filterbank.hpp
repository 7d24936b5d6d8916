#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "groupdet/core.hpp"

namespace groupdet {

/// Spatial frequency in cycles/pixel; u runs along x (columns), v along y (rows).
struct Frequency {
    double u = 0.0;
    double v = 0.0;
};

/// One analytic Gabor channel, defined in the frequency domain as a Gaussian in
/// log2-radius times a Gaussian in orientation, with unit peak at its center.
struct GaborChannel {
    double center_freq_u = 0.0;
    double center_freq_v = 0.0;
    double radial_bandwidth = 0.0;   ///< Gaussian sigma, octaves
    double angular_bandwidth = 0.0;  ///< Gaussian sigma, radians
    int index = 0;

    double center_radius() const;
    double orientation() const;
};

/// Parameters that generate a bank. The defaults give the 6 x 9 = 54 channel
/// layout spanning 0.0125 .. 0.4 cycles/pixel at octave spacing.
struct FilterbankLayout {
    int num_scales = 6;
    int num_orientations = 9;
    double min_center_freq = 0.0125;
    double max_center_freq = 0.4;
    /// Gain where neighbouring channels cross, per axis. The product of the two
    /// bounds the worst-case coverage between four channels.
    double radial_crossover = 0.75;
    double angular_crossover = 0.75;

    void validate() const;
};

FilterbankLayout read_filterbank_layout(const std::filesystem::path& path);

class FilterbankSpec {
public:
    FilterbankSpec() : FilterbankSpec(FilterbankLayout{}) {}
    explicit FilterbankSpec(const FilterbankLayout& layout);

    const FilterbankLayout& layout() const noexcept { return layout_; }
    const std::vector<GaborChannel>& channels() const noexcept { return channels_; }
    int size() const noexcept { return static_cast<int>(channels_.size()); }
    int num_scales() const noexcept { return layout_.num_scales; }
    int num_orientations() const noexcept { return layout_.num_orientations; }

    /// Channel index for (scale, orientation); scale 0 is the lowest frequency.
    int channel_index(int scale, int orientation) const;

private:
    FilterbankLayout layout_;
    std::vector<GaborChannel> channels_;
};

/// Transfer-function magnitude of one channel at an arbitrary frequency.
double channel_gain_at(const FilterbankSpec& spec, int channel_index, Frequency f);

/// Bank sampled on the DFT grid of the padded transform used for a given frame
/// size. Only bins with non-negligible gain are stored.
class FilterBank {
public:
    struct Tap {
        std::uint32_t bin;  ///< row-major index into the fft_h x fft_w grid
        float gain;
    };

    const FilterbankSpec& spec() const noexcept { return spec_; }
    int frame_width() const noexcept { return frame_w_; }
    int frame_height() const noexcept { return frame_h_; }
    int fft_width() const noexcept { return fft_w_; }
    int fft_height() const noexcept { return fft_h_; }
    int pad_x() const noexcept { return pad_x_; }
    int pad_y() const noexcept { return pad_y_; }
    int size() const noexcept { return spec_.size(); }

    const std::vector<Tap>& taps(int channel) const;

    /// Gain of a channel at DFT bin (kx, ky) of the padded grid.
    double transfer_at_bin(int channel, int kx, int ky) const;

    /// Frequency represented by a bin of the padded grid.
    Frequency bin_frequency(int kx, int ky) const;

private:
    friend FilterBank build_filterbank(int, int, const FilterbankSpec&);

    FilterbankSpec spec_;
    int frame_w_ = 0, frame_h_ = 0;
    int fft_w_ = 0, fft_h_ = 0;
    int pad_x_ = 0, pad_y_ = 0;
    std::vector<std::vector<Tap>> taps_;
};

inline constexpr int kMinFrameSize = 16;

/// Throws FrameTooSmall when either dimension is below 16.
FilterBank build_filterbank(int frame_w, int frame_h, const FilterbankSpec& spec = FilterbankSpec{});

/// Smallest n >= min_size whose only prime factors are 2, 3, 5, 7.
int next_fast_size(int min_size);

}  // namespace groupdet
