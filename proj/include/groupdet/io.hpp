#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "groupdet/core.hpp"

namespace groupdet {

// ---------------------------------------------------------------------------
// Detections and ground truth (JSONL, one object per line)
// ---------------------------------------------------------------------------

/// Parses detections.jsonl. Unknown keys are ignored and a missing score means
/// 1.0. The result is sorted by frame (stable with respect to file order).
DetectionSet read_detections(const std::filesystem::path& path, const std::string& video_id = "");
DetectionSet parse_detections(const std::string& text, const std::string& source = "<memory>",
                              const std::string& video_id = "");

std::string format_detections(const DetectionSet& set);
void write_detections(const std::filesystem::path& path, const DetectionSet& set);

struct GroundTruthRecord {
    int frame = 0;
    BoundingBox box;
    std::optional<std::string> person_id;

    friend bool operator==(const GroundTruthRecord&, const GroundTruthRecord&) = default;
};

/// Ground-truth boxes grouped by frame; within a frame, file order is kept.
using GroundTruth = std::map<int, std::vector<GroundTruthRecord>>;

GroundTruth read_ground_truth(const std::filesystem::path& path);
GroundTruth parse_ground_truth(const std::string& text, const std::string& source = "<memory>");
std::string format_ground_truth(const GroundTruth& gt);

/// Scores produced by an external classifier, keyed by (frame, box).
class ExternalScores {
public:
    void set(int frame, const BoundingBox& box, double score);
    std::optional<double> lookup(int frame, const BoundingBox& box) const;
    std::size_t size() const noexcept { return scores_.size(); }

private:
    using Key = std::array<int, 5>;
    std::map<Key, double> scores_;
};

/// Reads {"frame","x","y","w","h","score"} records; later duplicates win.
ExternalScores read_external_scores(const std::filesystem::path& path);
ExternalScores parse_external_scores(const std::string& text, const std::string& source = "<memory>");

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

/// 8-bit RGB image for overlays.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  ///< row-major, 3 bytes per pixel

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::array<std::uint8_t, 3> pixel(int x, int y) const;
    void set_pixel(int x, int y, std::array<std::uint8_t, 3> rgb);
};

/// Reads a PGM (P5, 8-bit) or PNG (8-bit gray/RGB, alpha ignored) as luma in
/// [0, 1]. RGB uses BT.601 weights. Throws UnreadableImage.
RasterF32 read_luma_image(const std::filesystem::path& path);

/// Quantizes [0, 1] samples (clamped) to 8 bits.
void write_gray_png(const std::filesystem::path& path, const RasterF32& img);
void write_gray_pgm(const std::filesystem::path& path, const RasterF32& img);
void write_rgb_png(const std::filesystem::path& path, const RgbImage& img);
RgbImage read_rgb_png(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Frame sequences
// ---------------------------------------------------------------------------

struct FrameFile {
    int index = 0;
    std::filesystem::path path;
};

/// Numerically named frames (e.g. 000.png, 17.pgm) in ascending index order.
/// Files without a numeric stem or with another extension are skipped.
/// Frames are decoded lazily; every frame must match the first one's size.
class FrameSequence {
public:
    explicit FrameSequence(const std::filesystem::path& dir);
    explicit FrameSequence(std::vector<std::filesystem::path> files);

    const std::vector<FrameFile>& files() const noexcept { return files_; }
    std::size_t size() const noexcept { return files_.size(); }
    bool empty() const noexcept { return files_.empty(); }

    /// Next (index, luma) pair, or nullopt when exhausted.
    std::optional<std::pair<int, RasterF32>> next();

    /// Random access by frame index; throws IndexOutOfRange if absent.
    /// Safe for concurrent use. Dimensions are checked against `expected`
    /// when given.
    RasterF32 load(int frame_index, std::optional<std::pair<int, int>> expected = std::nullopt) const;
    bool contains(int frame_index) const;
    const FrameFile* find(int frame_index) const;

private:
    void index_files(std::vector<std::filesystem::path> paths);

    std::vector<FrameFile> files_;
    std::size_t cursor_ = 0;
    std::optional<std::pair<int, int>> dims_;
};

/// Writes via a sibling temp file and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace groupdet
