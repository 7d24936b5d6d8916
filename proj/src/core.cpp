#include "groupdet/core.hpp"

#include <algorithm>
#include <cmath>

namespace groupdet {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidDimensions: return "InvalidDimensions";
        case ErrorCode::EmptyIntersection: return "EmptyIntersection";
        case ErrorCode::FrameTooSmall: return "FrameTooSmall";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::UnreadableImage: return "UnreadableImage";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::MissingExternalScore: return "MissingExternalScore";
        case ErrorCode::VideoIdMismatch: return "VideoIdMismatch";
    }
    return "Unknown";
}

const char* to_string(DetectionKind kind) {
    return kind == DetectionKind::Face ? "face" : "backhead";
}

const char* to_string(GroupLabel label) {
    switch (label) {
        case GroupLabel::InGroup: return "in";
        case GroupLabel::OutOfGroup: return "out";
        case GroupLabel::Unclassified: break;
    }
    return "unclassified";
}

bool all_finite(const RasterF32& img) {
    return std::all_of(img.values().begin(), img.values().end(),
                       [](float v) { return std::isfinite(v); });
}

BoundingBox clip_to_frame(const BoundingBox& box, int frame_w, int frame_h) {
    const int x0 = std::max(box.x, 0);
    const int y0 = std::max(box.y, 0);
    const int x1 = std::min(box.right(), frame_w);
    const int y1 = std::min(box.bottom(), frame_h);
    return {x0, y0, x1 - x0, y1 - y0};
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    const std::int64_t iw = std::max(0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
    const std::int64_t ih = std::max(0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
    const std::int64_t inter = iw * ih;
    const std::int64_t uni = a.area() + b.area() - inter;
    if (uni <= 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

RasterF32 crop_patch(const RasterF32& img, const BoundingBox& box) {
    const BoundingBox c = clip_to_frame(box, img.width(), img.height());
    if (!c.valid())
        throw Error(ErrorCode::EmptyIntersection, "box does not intersect the frame");
    RasterF32 out(c.w, c.h);
    for (int y = 0; y < c.h; ++y) {
        auto src = img.row(c.y + y).subspan(static_cast<std::size_t>(c.x), static_cast<std::size_t>(c.w));
        std::copy(src.begin(), src.end(), out.row(y).begin());
    }
    return out;
}

namespace {

struct Tap {
    int i0;
    int i1;
    float t;
};

std::vector<Tap> bilinear_taps(int in_n, int out_n) {
    std::vector<Tap> taps(static_cast<std::size_t>(out_n));
    const double ratio = static_cast<double>(in_n) / out_n;
    for (int o = 0; o < out_n; ++o) {
        double s = (o + 0.5) * ratio - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(in_n - 1));
        const int i0 = static_cast<int>(std::floor(s));
        const int i1 = std::min(i0 + 1, in_n - 1);
        taps[static_cast<std::size_t>(o)] = {i0, i1, static_cast<float>(s - i0)};
    }
    return taps;
}

// Exact at t == 0 and never leaves [min(a,b), max(a,b)] under rounding.
float lerp(float a, float b, float t) {
    if (t == 0.0f) return a;
    return std::clamp(a + t * (b - a), std::min(a, b), std::max(a, b));
}

}  // namespace

RasterF32 resize_bilinear(const RasterF32& img, int out_w, int out_h) {
    if (out_w <= 0 || out_h <= 0)
        throw Error(ErrorCode::InvalidDimensions, "resize target dimensions must be positive");
    if (img.empty())
        throw Error(ErrorCode::InvalidDimensions, "cannot resize an empty raster");
    if (out_w == img.width() && out_h == img.height()) return img;

    const auto tx = bilinear_taps(img.width(), out_w);
    const auto ty = bilinear_taps(img.height(), out_h);
    RasterF32 out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        const Tap& vy = ty[static_cast<std::size_t>(y)];
        auto r0 = img.row(vy.i0);
        auto r1 = img.row(vy.i1);
        auto dst = out.row(y);
        for (int x = 0; x < out_w; ++x) {
            const Tap& vx = tx[static_cast<std::size_t>(x)];
            const float top = lerp(r0[vx.i0], r0[vx.i1], vx.t);
            const float bot = lerp(r1[vx.i0], r1[vx.i1], vx.t);
            dst[x] = lerp(top, bot, vy.t);
        }
    }
    return out;
}

Detection::Detection(int frame_index, BoundingBox box, DetectionKind kind, double score)
    : frame_index_(frame_index), box_(box), kind_(kind), score_(0.0) {
    if (frame_index < 0)
        throw Error(ErrorCode::InvalidArgument, "frame index must be >= 0");
    if (!box.valid())
        throw Error(ErrorCode::InvalidArgument, "bounding box must have w > 0 and h > 0");
    set_score(score);
}

void Detection::set_score(double score) {
    if (!(score >= 0.0 && score <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "detection score must lie in [0,1]");
    score_ = score;
}

void DetectionSet::add(Detection d) {
    auto pos = std::upper_bound(detections_.begin(), detections_.end(), d.frame_index(),
                                [](int f, const Detection& e) { return f < e.frame_index(); });
    detections_.insert(pos, std::move(d));
}

}  // namespace groupdet
