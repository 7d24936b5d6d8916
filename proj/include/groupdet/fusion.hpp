#pragma once

#include "groupdet/core.hpp"

namespace groupdet {

inline constexpr double kDefaultIouDedup = 0.5;

/// Per-frame concatenation of in-group faces and accepted back-of-head
/// detections. A back-of-head box whose IOU with any face on the same frame
/// reaches `iou_dedup` is dropped; faces are never dropped and same-kind pairs
/// are never deduplicated. Every output record is marked InGroup. Throws
/// VideoIdMismatch when the two sets name different videos.
DetectionSet fuse(const DetectionSet& faces, const DetectionSet& backheads, double iou_dedup = kDefaultIouDedup);

}  // namespace groupdet
