#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "groupdet/core.hpp"
#include "groupdet/demod.hpp"
#include "groupdet/io.hpp"

namespace groupdet {

inline constexpr int kPatchSize = 100;

/// FM and IF magnitude under one detection box, resampled to 100 x 100.
/// if_mag stays in source-frame radians/pixel; multiply by if_scale to get
/// radians per patch pixel.
struct FmPatch {
    RasterF32 fm;
    RasterF32 if_mag;
    BoundingBox source_box;
    int source_frame = 0;
    /// Geometric mean of the per-axis resize factors (clipped box / 100).
    double if_scale = 1.0;

    RasterF32 if_mag_patch_units() const;
};

FmPatch extract_fm_patch(const AmFmField& field, const BoundingBox& box, int frame_index = 0);

enum class ScorerKind { BaselineFrequency, ExternalScores };

/// Default IF threshold in radians/pixel, from
/// synth::calibrate_group_filter(synth::two_scale_calibration_set(1)).
/// Rerun `groupdet calibrate` after changing the filterbank or demodulation.
inline constexpr double kDefaultIfThreshold = 0.2798;

struct GroupFilterConfig {
    double if_threshold = kDefaultIfThreshold;
    double decision_quantile = 0.5;
    ScorerKind scorer = ScorerKind::BaselineFrequency;
    std::string scores_file;
    double score_threshold = 0.5;

    void validate() const;
};

struct GroupDecision {
    bool in_group = false;
    double score = 0.0;

    friend bool operator==(const GroupDecision&, const GroupDecision&) = default;
};

/// Linear-interpolated quantile (q in [0,1]) of the samples.
double quantile(std::span<const float> values, double q);

/// score = 1 / (1 + (q / threshold)^2), strictly decreasing in q.
double frequency_score(double if_quantile, double if_threshold);

/// Baseline mode uses the IF quantile; ExternalScores mode looks the patch's
/// (frame, box) up in `external` and throws MissingExternalScore if absent.
GroupDecision classify_group(const FmPatch& patch, const GroupFilterConfig& cfg,
                             const ExternalScores* external = nullptr);

/// Produces the AM-FM field for a frame index. Must be callable concurrently.
using FieldProvider = std::function<AmFmField(int frame_index)>;

/// Labels every Face detection InGroup / OutOfGroup; detector scores are kept.
/// BackOfHead detections pass through untouched. Nothing is
/// removed and order is preserved. Frames are processed in parallel.
DetectionSet filter_detections(const DetectionSet& dets, const FieldProvider& fields, const GroupFilterConfig& cfg,
                               const ExternalScores* external = nullptr, int threads = 1);

/// Drops OutOfGroup detections.
DetectionSet drop_out_of_group(const DetectionSet& dets);

/// Geometric mean of the medians of the two IF-quantile populations.
double calibrate_if_threshold(std::span<const double> near_quantiles, std::span<const double> far_quantiles);

}  // namespace groupdet
