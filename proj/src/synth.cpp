#include "groupdet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "groupdet/demod.hpp"
#include "groupdet/filterbank.hpp"
#include "groupdet/group_filter.hpp"

namespace groupdet::synth {

namespace {
constexpr double kPi = std::numbers::pi;
}

// splitmix64
Rng::Rng(std::uint64_t seed) : state_(seed) {}

double Rng::uniform() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int lo, int hi) {
    return lo + static_cast<int>(std::floor(uniform() * (hi - lo + 1)));
}

RasterF32 plane_wave(int w, int h, double amplitude, double u, double v, double phase) {
    RasterF32 img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = static_cast<float>(amplitude * std::cos(2.0 * kPi * (u * x + v * y) + phase));
    return img;
}

RasterF32 linear_chirp(int w, int h, double amplitude, double f0, double f1) {
    RasterF32 img(w, h);
    const double rate = (f1 - f0) / w;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = static_cast<float>(amplitude * std::cos(2.0 * kPi * (f0 * x + 0.5 * rate * x * x)));
    return img;
}

RasterF32 decimate2(const RasterF32& img) {
    RasterF32 out((img.width() + 1) / 2, (img.height() + 1) / 2);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) out.at(x, y) = img.at(2 * x, 2 * y);
    return out;
}

namespace {

// 1 inside radius*(1-taper), raised-cosine roll-off to 0 at radius.
double disk_window(double r, double radius, double taper) {
    const double inner = radius * (1.0 - taper);
    if (r <= inner) return 1.0;
    if (r >= radius) return 0.0;
    return 0.5 * (1.0 + std::cos(kPi * (r - inner) / (radius - inner)));
}

BoundingBox tight_box(double cx, double cy, double radius) {
    const int x0 = static_cast<int>(std::floor(cx - radius));
    const int y0 = static_cast<int>(std::floor(cy - radius));
    const int x1 = static_cast<int>(std::ceil(cx + radius));
    const int y1 = static_cast<int>(std::ceil(cy + radius));
    return {x0, y0, x1 - x0, y1 - y0};
}

// Returns the tight box of the pixels it touched.
template <typename Pattern>
BoundingBox paint_disk(RasterF32& canvas, double cx, double cy, double radius, double taper, Pattern&& pattern) {
    const BoundingBox b = clip_to_frame(tight_box(cx, cy, radius), canvas.width(), canvas.height());
    int x0 = b.right(), y0 = b.bottom(), x1 = b.x - 1, y1 = b.y - 1;
    for (int y = b.y; y < b.bottom(); ++y)
        for (int x = b.x; x < b.right(); ++x) {
            const double dx = x - cx, dy = y - cy;
            const double wgt = disk_window(std::hypot(dx, dy), radius, taper);
            if (wgt <= 0.0) continue;
            canvas.at(x, y) += static_cast<float>(wgt * pattern(dx, dy));
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
    if (x1 < x0) throw Error(ErrorCode::InvalidArgument, "synthetic disk falls outside the canvas");
    return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

}  // namespace

BoundingBox add_face(RasterF32& canvas, double cx, double cy, double distance_scale, const FaceStyle& style,
                     Rng& rng) {
    const double radius = 0.5 * style.diameter / distance_scale;
    const double f = style.frequency * distance_scale;
    const double a1 = rng.uniform(0.0, kPi), a2 = a1 + rng.uniform(0.35 * kPi, 0.65 * kPi);
    const double p1 = rng.uniform(0.0, 2.0 * kPi), p2 = rng.uniform(0.0, 2.0 * kPi);
    const double amp = style.amplitude;
    return paint_disk(canvas, cx, cy, radius, style.edge_taper, [&](double dx, double dy) {
        return 0.5 * amp *
               (std::cos(2.0 * kPi * f * (dx * std::cos(a1) + dy * std::sin(a1)) + p1) +
                std::cos(2.0 * kPi * f * (dx * std::cos(a2) + dy * std::sin(a2)) + p2));
    });
}

BoundingBox add_backhead(RasterF32& canvas, double cx, double cy, const HairStyle& style, Rng& rng) {
    const double radius = 0.5 * style.diameter;
    const double a = rng.uniform(0.0, kPi);
    const double p = rng.uniform(0.0, 2.0 * kPi);
    return paint_disk(canvas, cx, cy, radius, style.edge_taper, [&](double dx, double dy) {
        return style.amplitude * std::cos(2.0 * kPi * style.frequency * (dx * std::cos(a) + dy * std::sin(a)) + p);
    });
}

namespace {

struct Placed {
    double cx, cy, radius;
};

// Rejection sampling of a center that keeps `gap` pixels to the frame border
// and to every placed item.
bool place(Rng& rng, int w, int h, double radius, double gap, std::vector<Placed>& placed, Placed& out) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        const double cx = rng.uniform(radius + gap, w - radius - gap);
        const double cy = rng.uniform(radius + gap, h - radius - gap);
        const bool clear = std::all_of(placed.begin(), placed.end(), [&](const Placed& p) {
            return std::hypot(cx - p.cx, cy - p.cy) >= radius + p.radius + gap;
        });
        if (clear) {
            out = {std::round(cx) + 0.5, std::round(cy) + 0.5, radius};
            placed.push_back(out);
            return true;
        }
    }
    return false;
}

/// Centers for near faces, then back-of-head disks, then far faces. A partial
/// layout can leave no room for the remaining items, so whole layouts are retried.
std::vector<Placed> layout_frame(Rng& rng, const SceneSpec& spec, double gap) {
    std::vector<double> radii;
    radii.insert(radii.end(), static_cast<std::size_t>(spec.near_faces), 0.5 * spec.face.diameter);
    radii.insert(radii.end(), static_cast<std::size_t>(spec.backheads), 0.5 * spec.hair.diameter);
    radii.insert(radii.end(), static_cast<std::size_t>(spec.far_faces), 0.5 * spec.face.diameter / spec.far_scale);
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<Placed> placed;
        Placed p{};
        bool ok = true;
        for (double r : radii)
            if (!place(rng, spec.width, spec.height, r, gap, placed, p)) {
                ok = false;
                break;
            }
        if (ok) return placed;
    }
    throw Error(ErrorCode::InvalidArgument, "synthetic scene too crowded for the requested items");
}

}  // namespace

SyntheticVideo make_video(const SceneSpec& spec) {
    SyntheticVideo video;
    video.face_detections = DetectionSet("synthetic");
    Rng rng(spec.seed);
    const double gap = 8.0;
    for (int f = 0; f < spec.frames; ++f) {
        RasterF32 canvas(spec.width, spec.height, static_cast<float>(spec.background));
        const std::vector<Placed> layout = layout_frame(rng, spec, gap);
        std::vector<BoundingBox> near, far, heads;
        std::size_t k = 0;
        for (int i = 0; i < spec.near_faces; ++i, ++k)
            near.push_back(add_face(canvas, layout[k].cx, layout[k].cy, 1.0, spec.face, rng));
        for (int i = 0; i < spec.backheads; ++i, ++k)
            heads.push_back(add_backhead(canvas, layout[k].cx, layout[k].cy, spec.hair, rng));
        for (int i = 0; i < spec.far_faces; ++i, ++k)
            far.push_back(add_face(canvas, layout[k].cx, layout[k].cy, spec.far_scale, spec.face, rng));
        if (spec.noise > 0.0)
            for (float& v : canvas.values()) v += static_cast<float>(rng.uniform(-spec.noise, spec.noise));
        for (float& v : canvas.values()) v = std::clamp(v, 0.0f, 1.0f);

        for (const auto& b : near) video.face_detections.add(Detection(f, b, DetectionKind::Face, 0.9));
        for (const auto& b : far) video.face_detections.add(Detection(f, b, DetectionKind::Face, 0.9));
        auto& gt = video.ground_truth[f];
        for (const auto& b : near) gt.push_back({f, b, std::nullopt});
        for (const auto& b : heads) gt.push_back({f, b, std::nullopt});

        video.frames.push_back(std::move(canvas));
        video.near_boxes.push_back(std::move(near));
        video.far_boxes.push_back(std::move(far));
        video.backhead_boxes.push_back(std::move(heads));
    }
    return video;
}

void write_video(const SyntheticVideo& video, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "frames");
    char name[32];
    for (std::size_t i = 0; i < video.frames.size(); ++i) {
        std::snprintf(name, sizeof name, "%06zu.png", i);
        write_gray_png(dir / "frames" / name, video.frames[i]);
    }
    write_detections(dir / "detections.jsonl", video.face_detections);
    write_file_atomic(dir / "groundtruth.jsonl", format_ground_truth(video.ground_truth));
}

SceneSpec two_scale_calibration_set(std::uint64_t seed, int frames) {
    SceneSpec spec;
    spec.frames = frames;
    spec.near_faces = 1;
    spec.far_faces = 2;
    spec.backheads = 0;
    spec.seed = seed;
    return spec;
}

Calibration calibrate_group_filter(const SceneSpec& spec, double decision_quantile, int threads) {
    const SyntheticVideo video = make_video(spec);
    const FilterBank bank = build_filterbank(spec.width, spec.height);
    DemodOptions opts;
    opts.threads = threads;
    Calibration cal;
    for (std::size_t f = 0; f < video.frames.size(); ++f) {
        const AmFmField field = dca_decompose(video.frames[f], bank, opts);
        auto q = [&](const BoundingBox& b) {
            const FmPatch patch = extract_fm_patch(field, b, static_cast<int>(f));
            return quantile(patch.if_mag.values(), decision_quantile);
        };
        for (const auto& b : video.near_boxes[f]) cal.near_quantiles.push_back(q(b));
        for (const auto& b : video.far_boxes[f]) cal.far_quantiles.push_back(q(b));
    }
    cal.if_threshold = calibrate_if_threshold(cal.near_quantiles, cal.far_quantiles);
    return cal;
}

}  // namespace groupdet::synth
