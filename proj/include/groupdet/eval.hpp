#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "groupdet/core.hpp"
#include "groupdet/io.hpp"

namespace groupdet {

inline constexpr double kDefaultIouMin = 0.6;

struct ScoredBox {
    BoundingBox box;
    double score = 1.0;
};

struct FrameMatch {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    /// (detection index, ground-truth index) into the caller's input order.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

struct MatchOptions {
    /// After the greedy pass, repair with augmenting paths so the number of
    /// matches is maximal. Greedy alone can lose a match when two ground-truth
    /// boxes overlap the same detection.
    bool augment = true;
};

/// One-to-one matching of detections to ground truth at IOU >= iou_min.
/// Candidate pairs are taken by descending IOU; ties go to the higher
/// detection score, then the lower detection index, then the lower
/// ground-truth index, where indices refer to a canonical (y, x, h, w, -score)
/// ordering so that input order never matters.
FrameMatch match_frame(const std::vector<ScoredBox>& dets, const std::vector<BoundingBox>& gts,
                       double iou_min = kDefaultIouMin, MatchOptions opts = {});

struct EvalReport {
    std::string video_id;
    std::int64_t frames_evaluated = 0;
    std::int64_t labeled = 0;
    std::int64_t detected = 0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// 2 tp / (2 tp + fp + fn), or 0 when the denominator is 0.
double f1_score(std::int64_t tp, std::int64_t fp, std::int64_t fn);

/// Fills precision, recall and f1 from the counts.
void finalize_report(EvalReport& report);

/// Sums match_frame over the frames present in `gt`; detections on any other
/// frame are ignored.
EvalReport evaluate_video(const DetectionSet& dets, const GroundTruth& gt, double iou_min = kDefaultIouMin,
                          int threads = 1, MatchOptions opts = {});

std::string format_report_table(const std::vector<EvalReport>& reports);
std::string format_report_json(const EvalReport& report);

}  // namespace groupdet
