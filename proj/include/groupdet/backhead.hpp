#pragma once

#include <string>
#include <vector>

#include "groupdet/core.hpp"
#include "groupdet/demod.hpp"
#include "groupdet/group_filter.hpp"
#include "groupdet/io.hpp"

namespace groupdet {

/// Texture-based back-of-head candidate search. Hair shows up as strong AM
/// with instantaneous frequency inside a mid/high band.
struct BackHeadConfig {
    double if_band_low = 0.6;   ///< radians/pixel
    double if_band_high = 2.4;  ///< radians/pixel
    /// AM threshold as a multiple of the frame's reference AM, where the
    /// reference is max(median AM, am_reference_floor * 99th-percentile AM).
    /// The floor keeps mostly-flat frames (median ~ 0) from accepting tails.
    double min_am = 1.5;
    double am_reference_floor = 0.3;
    long long min_region_area = 900;
    long long max_region_area = 40000;
    double aspect_min = 0.5;  ///< bounding-box width / height
    double aspect_max = 2.0;
    double score_threshold = 0.5;
    ScorerKind scorer = ScorerKind::BaselineFrequency;
    std::string scores_file;

    void validate() const;
};

/// Threshold on am actually applied for this field.
double backhead_am_threshold(const AmFmField& field, const BackHeadConfig& cfg);

/// Binary texture mask before morphology (1 = candidate pixel).
Raster<std::uint8_t> texture_mask(const AmFmField& field, const BackHeadConfig& cfg);

/// 3x3 closing, one iteration. Pixels outside the frame do not erode.
Raster<std::uint8_t> close3x3(const Raster<std::uint8_t>& mask);

struct Component {
    BoundingBox box;
    long long area = 0;  ///< pixel count
};

/// 8-connected components, in raster order of their first pixel.
std::vector<Component> connected_components(const Raster<std::uint8_t>& mask);

/// Tight boxes of the texture components that pass the area and aspect
/// filters, largest component first.
std::vector<BoundingBox> candidate_regions(const AmFmField& field, const BackHeadConfig& cfg);

struct BackHeadPatch {
    RasterF32 am;
    RasterF32 if_mag;
    BoundingBox box;
    int frame = 0;
};

BackHeadPatch extract_backhead_patch(const AmFmField& field, const BoundingBox& box, int frame_index = 0);

/// Baseline: AM-weighted fraction of patch pixels whose |IF| is in band.
GroupDecision classify_backhead(const BackHeadPatch& patch, const BackHeadConfig& cfg,
                                const ExternalScores* external = nullptr);

/// Candidates of one frame that the classifier accepts, as BackOfHead
/// detections scored by the classifier.
std::vector<Detection> detect_backheads(const AmFmField& field, int frame_index, const BackHeadConfig& cfg,
                                        const ExternalScores* external = nullptr);

}  // namespace groupdet
