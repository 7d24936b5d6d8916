#pragma once

#include <span>
#include <vector>

#include "groupdet/core.hpp"

namespace groupdet::detail {

/// Burg estimate of AR coefficients a[0..order) such that
/// x[n] ~ -sum_k a[k] * x[n-1-k].
std::vector<double> burg_coefficients(std::span<const double> x, int order);

/// Mean-removed frame placed at (px, py) in a W x H grid; the rest of the grid
/// is filled by AR prediction along rows, then along the widened columns.
std::vector<double> predictive_extend(const RasterF32& frame, double mean, int W, int H, int px, int py,
                                      int order);

}  // namespace groupdet::detail
