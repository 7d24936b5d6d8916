#include "groupdet/group_filter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "groupdet/parallel.hpp"

namespace groupdet {

RasterF32 FmPatch::if_mag_patch_units() const {
    RasterF32 out = if_mag;
    for (float& v : out.values()) v = static_cast<float>(v * if_scale);
    return out;
}

FmPatch extract_fm_patch(const AmFmField& field, const BoundingBox& box, int frame_index) {
    const BoundingBox clipped = clip_to_frame(box, field.width(), field.height());
    if (!clipped.valid())
        throw Error(ErrorCode::EmptyIntersection, "detection box does not intersect the frame");
    FmPatch p;
    p.fm = resize_bilinear(crop_patch(field.fm_cos, clipped), kPatchSize, kPatchSize);
    p.if_mag = resize_bilinear(crop_patch(field.if_magnitude(), clipped), kPatchSize, kPatchSize);
    p.source_box = box;
    p.source_frame = frame_index;
    p.if_scale = std::sqrt((static_cast<double>(clipped.w) / kPatchSize) * (static_cast<double>(clipped.h) / kPatchSize));
    return p;
}

void GroupFilterConfig::validate() const {
    if (!(if_threshold > 0.0 && std::isfinite(if_threshold)))
        throw Error(ErrorCode::InvalidArgument, "--if-threshold must be a positive number");
    if (!(decision_quantile > 0.0 && decision_quantile < 1.0))
        throw Error(ErrorCode::InvalidArgument, "--quantile must lie in (0,1)");
    if (!(score_threshold >= 0.0 && score_threshold <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "--score-threshold must lie in [0,1]");
    if (scorer == ScorerKind::ExternalScores && scores_file.empty())
        throw Error(ErrorCode::InvalidArgument, "--scores-file is required with --scorer external");
}

namespace {

template <typename T>
double quantile_of(std::span<const T> values, double q) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level must lie in [0,1]");
    std::vector<T> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return v[lo] + t * (static_cast<double>(v[hi]) - v[lo]);
}

}  // namespace

double quantile(std::span<const float> values, double q) { return quantile_of(values, q); }

double frequency_score(double if_quantile, double if_threshold) {
    if (!(if_threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "IF threshold must be positive");
    const double r = if_quantile / if_threshold;
    return 1.0 / (1.0 + r * r);
}

GroupDecision classify_group(const FmPatch& patch, const GroupFilterConfig& cfg, const ExternalScores* external) {
    double score;
    if (cfg.scorer == ScorerKind::ExternalScores) {
        std::optional<double> s = external ? external->lookup(patch.source_frame, patch.source_box) : std::nullopt;
        if (!s) {
            const BoundingBox& b = patch.source_box;
            throw Error(ErrorCode::MissingExternalScore,
                        "no external score for frame " + std::to_string(patch.source_frame) + " box (" +
                            std::to_string(b.x) + "," + std::to_string(b.y) + "," + std::to_string(b.w) + "," +
                            std::to_string(b.h) + ")");
        }
        score = *s;
    } else {
        score = frequency_score(quantile(patch.if_mag.values(), cfg.decision_quantile), cfg.if_threshold);
    }
    return {score >= cfg.score_threshold, score};
}

DetectionSet filter_detections(const DetectionSet& dets, const FieldProvider& fields, const GroupFilterConfig& cfg,
                               const ExternalScores* external, int threads) {
    cfg.validate();
    std::map<int, std::vector<std::size_t>> faces_by_frame;
    for (std::size_t i = 0; i < dets.size(); ++i)
        if (dets[i].kind() == DetectionKind::Face) faces_by_frame[dets[i].frame_index()].push_back(i);

    std::vector<std::pair<int, std::vector<std::size_t>>> work(faces_by_frame.begin(), faces_by_frame.end());
    std::vector<GroupLabel> labels(dets.size(), GroupLabel::Unclassified);

    parallel_for(work.size(), threads, [&](std::size_t w) {
        const auto& [frame, members] = work[w];
        AmFmField field;
        try {
            field = fields(frame);
        } catch (const Error& e) {
            throw Error(e.code(), "frame " + std::to_string(frame) + ": " + e.what());
        }
        for (std::size_t i : members) {
            const Detection& d = dets[i];
            FmPatch patch;
            try {
                patch = extract_fm_patch(field, d.box(), frame);
            } catch (const Error& e) {
                throw Error(e.code(), "frame " + std::to_string(frame) + ": " + e.what());
            }
            labels[i] = classify_group(patch, cfg, external).in_group ? GroupLabel::InGroup : GroupLabel::OutOfGroup;
        }
    });

    DetectionSet out = dets;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out[i].kind() == DetectionKind::Face) out[i].set_in_group(labels[i]);
    return out;
}

DetectionSet drop_out_of_group(const DetectionSet& dets) {
    DetectionSet out(dets.video_id());
    for (const Detection& d : dets)
        if (d.in_group() != GroupLabel::OutOfGroup) out.add(d);
    return out;
}

double calibrate_if_threshold(std::span<const double> near_quantiles, std::span<const double> far_quantiles) {
    if (near_quantiles.empty() || far_quantiles.empty())
        throw Error(ErrorCode::InvalidArgument, "calibration needs both near and far samples");
    auto median = [](std::span<const double> s) { return quantile_of(s, 0.5); };
    const double a = median(near_quantiles);
    const double b = median(far_quantiles);
    if (!(a > 0.0 && b > 0.0)) throw Error(ErrorCode::InvalidArgument, "calibration medians must be positive");
    return std::sqrt(a * b);
}

}  // namespace groupdet
