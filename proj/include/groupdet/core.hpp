#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "groupdet/error.hpp"

namespace groupdet {

/// Single-channel row-major image plane.
template <typename T>
class Raster {
public:
    Raster() = default;

    Raster(int width, int height, T fill = T{})
        : width_(checked(width)), height_(checked(height)),
          data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

    Raster(int width, int height, std::vector<T> data)
        : width_(checked(width)), height_(checked(height)), data_(std::move(data)) {
        if (data_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_))
            throw Error(ErrorCode::InvalidDimensions, "raster data length does not match width*height");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t size() const noexcept { return data_.size(); }

    T& at(int x, int y) { return data_[index(x, y)]; }
    const T& at(int x, int y) const { return data_[index(x, y)]; }

    std::span<T> row(int y) {
        return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
    }
    std::span<const T> row(int y) const {
        return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
    }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    bool same_shape(const Raster& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    static int checked(int v) {
        if (v <= 0) throw Error(ErrorCode::InvalidDimensions, "raster dimensions must be positive");
        return v;
    }
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using RasterF32 = Raster<float>;
using ChannelRaster = Raster<std::uint16_t>;

bool all_finite(const RasterF32& img);

/// Axis-aligned pixel box covering [x, x+w) x [y, y+h).
struct BoundingBox {
    int x = 0;
    int y = 0;
    int w = 1;
    int h = 1;

    bool valid() const noexcept { return w > 0 && h > 0; }
    std::int64_t area() const noexcept { return std::int64_t{w} * h; }
    int right() const noexcept { return x + w; }
    int bottom() const noexcept { return y + h; }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Intersection of a box with the frame rectangle; w or h is <= 0 when empty.
BoundingBox clip_to_frame(const BoundingBox& box, int frame_w, int frame_h);

/// Intersection over union on unclipped extents. Both boxes must be valid.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Copy of the part of `img` under `box`, clipped to the frame.
/// Throws EmptyIntersection when nothing is left after clipping.
RasterF32 crop_patch(const RasterF32& img, const BoundingBox& box);

/// Bilinear resample with pixel-center alignment.
RasterF32 resize_bilinear(const RasterF32& img, int out_w, int out_h);

enum class DetectionKind { Face, BackOfHead };
enum class GroupLabel { Unclassified, InGroup, OutOfGroup };

class Detection {
public:
    Detection(int frame_index, BoundingBox box, DetectionKind kind, double score = 1.0);

    int frame_index() const noexcept { return frame_index_; }
    const BoundingBox& box() const noexcept { return box_; }
    DetectionKind kind() const noexcept { return kind_; }
    double score() const noexcept { return score_; }
    GroupLabel in_group() const noexcept { return in_group_; }

    void set_score(double score);
    void set_in_group(GroupLabel label) noexcept { in_group_ = label; }

    friend bool operator==(const Detection&, const Detection&) = default;

private:
    int frame_index_;
    BoundingBox box_;
    DetectionKind kind_;
    double score_;
    GroupLabel in_group_ = GroupLabel::Unclassified;
};

/// Detections of one video kept in (frame_index, insertion order).
class DetectionSet {
public:
    DetectionSet() = default;
    explicit DetectionSet(std::string video_id) : video_id_(std::move(video_id)) {}

    const std::string& video_id() const noexcept { return video_id_; }
    void set_video_id(std::string id) { video_id_ = std::move(id); }

    /// Inserts after every detection with frame_index <= d.frame_index().
    void add(Detection d);

    const std::vector<Detection>& detections() const noexcept { return detections_; }
    std::size_t size() const noexcept { return detections_.size(); }
    bool empty() const noexcept { return detections_.empty(); }
    auto begin() const noexcept { return detections_.begin(); }
    auto end() const noexcept { return detections_.end(); }

    /// Mutable access for annotation; frame_index and kind cannot change.
    Detection& operator[](std::size_t i) { return detections_[i]; }
    const Detection& operator[](std::size_t i) const { return detections_[i]; }

    friend bool operator==(const DetectionSet&, const DetectionSet&) = default;

private:
    std::string video_id_;
    std::vector<Detection> detections_;
};

const char* to_string(DetectionKind kind);
const char* to_string(GroupLabel label);

}  // namespace groupdet
