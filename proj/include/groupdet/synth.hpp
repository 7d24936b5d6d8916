#pragma once

#include <cstdint>
#include <vector>

#include "groupdet/core.hpp"
#include "groupdet/io.hpp"

/// Deterministic synthetic imagery for tests, calibration and demos.
namespace groupdet::synth {

/// Portable PRNG wrapper; unlike std distributions its output is identical on
/// every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    double uniform();                    ///< [0, 1)
    double uniform(double lo, double hi);
    int uniform_int(int lo, int hi);     ///< inclusive

private:
    std::uint64_t state_;
};

/// amplitude * cos(2 pi (u x + v y) + phase)
RasterF32 plane_wave(int w, int h, double amplitude, double u, double v, double phase = 0.0);

/// Horizontal linear chirp whose frequency goes from f0 (x = 0) to f1 (x = w)
/// cycles/pixel.
RasterF32 linear_chirp(int w, int h, double amplitude, double f0, double f1);

/// Every other sample in both directions.
RasterF32 decimate2(const RasterF32& img);

/// Appearance of the synthetic face texture at distance scale 1. A face at
/// distance scale s is the same pattern shrunk by s, so its diameter is
/// diameter / s and its frequency frequency * s.
struct FaceStyle {
    double diameter = 96.0;
    double frequency = 0.02;  ///< cycles/pixel at scale 1
    double amplitude = 0.4;
    double edge_taper = 0.15;  ///< raised-cosine roll-off, fraction of the radius
};

struct HairStyle {
    double diameter = 80.0;
    double frequency = 0.2;  ///< cycles/pixel
    double amplitude = 0.4;
    double edge_taper = 0.15;
};

/// Adds a face centered at (cx, cy) and returns its tight box.
BoundingBox add_face(RasterF32& canvas, double cx, double cy, double distance_scale, const FaceStyle& style,
                     Rng& rng);

/// Adds a textured back-of-head disk and returns its tight box.
BoundingBox add_backhead(RasterF32& canvas, double cx, double cy, const HairStyle& style, Rng& rng);

struct SceneSpec {
    int width = 256;
    int height = 192;
    int frames = 50;
    int near_faces = 1;
    int far_faces = 2;
    int backheads = 1;
    double far_scale = 4.0;
    double background = 0.5;
    double noise = 0.0;  ///< uniform noise half-width
    FaceStyle face;
    HairStyle hair;
    std::uint64_t seed = 1;
};

struct SyntheticVideo {
    std::vector<RasterF32> frames;
    /// What a face detector would report: every near and far face.
    DetectionSet face_detections;
    /// Near faces and back-of-head disks.
    GroundTruth ground_truth;
    /// Boxes by category, per frame.
    std::vector<std::vector<BoundingBox>> near_boxes;
    std::vector<std::vector<BoundingBox>> far_boxes;
    std::vector<std::vector<BoundingBox>> backhead_boxes;
};

/// Non-overlapping random layout of the requested items in every frame.
SyntheticVideo make_video(const SceneSpec& spec);

/// Scene used to calibrate the group filter: near and far faces only.
SceneSpec two_scale_calibration_set(std::uint64_t seed, int frames = 10);

struct Calibration {
    double if_threshold = 0.0;
    std::vector<double> near_quantiles;
    std::vector<double> far_quantiles;
};

/// Demodulates every frame of `spec` and calibrates the IF threshold on the
/// decision quantiles of its near and far face patches.
Calibration calibrate_group_filter(const SceneSpec& spec, double decision_quantile = 0.5, int threads = 1);

/// Writes frames as 000000.png ... plus detections.jsonl and groundtruth.jsonl.
void write_video(const SyntheticVideo& video, const std::filesystem::path& dir);

}  // namespace groupdet::synth
