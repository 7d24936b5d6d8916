#include "groupdet/fusion.hpp"

#include <algorithm>

namespace groupdet {

DetectionSet fuse(const DetectionSet& faces, const DetectionSet& backheads, double iou_dedup) {
    if (!(iou_dedup >= 0.0 && iou_dedup <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "--iou-dedup must lie in [0,1]");
    if (faces.video_id() != backheads.video_id())
        throw Error(ErrorCode::VideoIdMismatch,
                    "cannot fuse video \"" + faces.video_id() + "\" with \"" + backheads.video_id() + "\"");

    DetectionSet out(faces.video_id());
    for (Detection d : faces) {
        d.set_in_group(GroupLabel::InGroup);
        out.add(std::move(d));
    }

    // Faces are sorted by frame, so the faces of one frame form a contiguous range.
    const auto& fv = faces.detections();
    for (Detection d : backheads) {
        auto lo = std::lower_bound(fv.begin(), fv.end(), d.frame_index(),
                                   [](const Detection& e, int f) { return e.frame_index() < f; });
        bool duplicate = false;
        for (auto it = lo; it != fv.end() && it->frame_index() == d.frame_index(); ++it)
            if (it->kind() == DetectionKind::Face && iou(it->box(), d.box()) >= iou_dedup) {
                duplicate = true;
                break;
            }
        if (duplicate) continue;
        d.set_in_group(GroupLabel::InGroup);
        out.add(std::move(d));
    }
    return out;
}

}  // namespace groupdet
