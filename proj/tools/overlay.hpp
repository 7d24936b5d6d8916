#pragma once

#include <array>
#include <cstdint>

#include "groupdet/core.hpp"
#include "groupdet/io.hpp"

namespace groupdet::cli {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kGreen{0, 255, 0};
inline constexpr Rgb kRed{255, 0, 0};
inline constexpr Rgb kYellow{255, 255, 0};

/// Gray raster in [0,1] replicated into three channels.
RgbImage to_rgb(const RasterF32& gray);

/// One-pixel outline of `box`; parts outside the image are skipped.
void draw_box_outline(RgbImage& img, const BoundingBox& box, Rgb color);

}  // namespace groupdet::cli
