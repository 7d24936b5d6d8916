#pragma once

#include <utility>

#include "groupdet/core.hpp"
#include "groupdet/filterbank.hpp"

namespace groupdet {

/// Dominant-component AM-FM description of one frame. if_u / if_v are the
/// instantaneous frequency in radians/pixel along x and y.
struct AmFmField {
    RasterF32 am;
    RasterF32 fm_cos;
    RasterF32 if_u;
    RasterF32 if_v;
    ChannelRaster dominant_channel;

    int width() const noexcept { return am.width(); }
    int height() const noexcept { return am.height(); }

    /// Per-pixel |(if_u, if_v)|.
    RasterF32 if_magnitude() const;
};

/// How the frame is continued into the transform padding.
enum class BoundaryExtension {
    /// Mirror about the edge samples.
    Reflect,
    /// Burg autoregressive prediction along rows, then columns. Continues
    /// plane waves straight through the edge, where reflection would bend them.
    LinearPrediction,
};

struct DemodOptions {
    int threads = 1;
    /// AM correction never divides by a channel gain below this.
    double gain_floor = 0.1;
    /// Responses weaker than this fraction of the frame's strongest response
    /// get IF = (0, 0).
    double magnitude_floor = 1e-6;
    BoundaryExtension boundary = BoundaryExtension::LinearPrediction;
    int prediction_order = 8;
};

/// Filters the mean-removed frame with every channel of `bank`, keeps the
/// strongest response per pixel (lowest channel index on ties) and derives
/// AM, FM and IF from it. Throws DimensionMismatch if the frame does not match
/// the size the bank was built for.
AmFmField dca_decompose(const RasterF32& frame, const FilterBank& bank, const DemodOptions& opts = {});

/// Instantaneous frequency of a complex response g = re + i*im, computed as
/// the phase of neighbouring-sample products (no explicit unwrapping). Pixels
/// with |g| below 1e-6 of the raster maximum get (0, 0); magnitudes are
/// clamped to pi. Returns (if_u, if_v) in radians/pixel.
std::pair<RasterF32, RasterF32> phase_gradient(const RasterF32& resp_real, const RasterF32& resp_imag);

/// fm_cos mapped affinely from [-1, 1] to [0, 1].
RasterF32 fm_image(const AmFmField& field);

}  // namespace groupdet
