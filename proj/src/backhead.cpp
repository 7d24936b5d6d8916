#include "groupdet/backhead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace groupdet {

void BackHeadConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
    if (!(if_band_low >= 0.0 && if_band_low < if_band_high))
        fail("--if-band-low must be >= 0 and below --if-band-high");
    if (!(min_am >= 0.0)) fail("--min-am must be >= 0");
    if (!(am_reference_floor >= 0.0 && am_reference_floor <= 1.0)) fail("--am-reference-floor must lie in [0,1]");
    if (!(min_region_area >= 0 && min_region_area < max_region_area))
        fail("--min-area must be >= 0 and below --max-area");
    if (!(aspect_min > 0.0 && aspect_min <= aspect_max)) fail("--aspect-min must be > 0 and <= --aspect-max");
    if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) fail("--score-threshold must lie in [0,1]");
    if (scorer == ScorerKind::ExternalScores && scores_file.empty())
        fail("--scores-file is required with --scorer external");
}

double backhead_am_threshold(const AmFmField& field, const BackHeadConfig& cfg) {
    const double median = quantile(field.am.values(), 0.5);
    const double p99 = quantile(field.am.values(), 0.99);
    return cfg.min_am * std::max(median, cfg.am_reference_floor * p99);
}

Raster<std::uint8_t> texture_mask(const AmFmField& field, const BackHeadConfig& cfg) {
    const double am_min = backhead_am_threshold(field, cfg);
    Raster<std::uint8_t> mask(field.width(), field.height());
    const RasterF32 ifm = field.if_magnitude();
    auto am = field.am.values();
    auto f = ifm.values();
    auto m = mask.values();
    for (std::size_t i = 0; i < m.size(); ++i)
        m[i] = am[i] > 0.0f && am[i] >= am_min && f[i] >= cfg.if_band_low && f[i] <= cfg.if_band_high;
    return mask;
}

Raster<std::uint8_t> close3x3(const Raster<std::uint8_t>& mask) {
    const int w = mask.width();
    const int h = mask.height();
    Raster<std::uint8_t> dil(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = 0;
            for (int dy = -1; dy <= 1 && !v; ++dy)
                for (int dx = -1; dx <= 1 && !v; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    if (xx >= 0 && yy >= 0 && xx < w && yy < h) v = mask.at(xx, yy);
                }
            dil.at(x, y) = v;
        }
    Raster<std::uint8_t> out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::uint8_t v = 1;
            for (int dy = -1; dy <= 1 && v; ++dy)
                for (int dx = -1; dx <= 1 && v; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    if (xx >= 0 && yy >= 0 && xx < w && yy < h) v = dil.at(xx, yy);
                }
            out.at(x, y) = v;
        }
    return out;
}

std::vector<Component> connected_components(const Raster<std::uint8_t>& mask) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<std::uint8_t> seen(mask.size(), 0);
    std::vector<Component> comps;
    std::vector<std::pair<int, int>> stack;
    for (int y0 = 0; y0 < h; ++y0)
        for (int x0 = 0; x0 < w; ++x0) {
            const std::size_t i0 = static_cast<std::size_t>(y0) * w + x0;
            if (!mask.at(x0, y0) || seen[i0]) continue;
            int minx = x0, maxx = x0, miny = y0, maxy = y0;
            long long area = 0;
            seen[i0] = 1;
            stack.assign(1, {x0, y0});
            while (!stack.empty()) {
                auto [x, y] = stack.back();
                stack.pop_back();
                ++area;
                minx = std::min(minx, x);
                maxx = std::max(maxx, x);
                miny = std::min(miny, y);
                maxy = std::max(maxy, y);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int xx = x + dx, yy = y + dy;
                        if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
                        const std::size_t j = static_cast<std::size_t>(yy) * w + xx;
                        if (mask.at(xx, yy) && !seen[j]) {
                            seen[j] = 1;
                            stack.emplace_back(xx, yy);
                        }
                    }
            }
            comps.push_back({{minx, miny, maxx - minx + 1, maxy - miny + 1}, area});
        }
    return comps;
}

std::vector<BoundingBox> candidate_regions(const AmFmField& field, const BackHeadConfig& cfg) {
    cfg.validate();
    std::vector<Component> comps = connected_components(close3x3(texture_mask(field, cfg)));
    std::erase_if(comps, [&](const Component& c) {
        const double aspect = static_cast<double>(c.box.w) / c.box.h;
        return c.area < cfg.min_region_area || c.area > cfg.max_region_area || aspect < cfg.aspect_min ||
               aspect > cfg.aspect_max;
    });
    // Components come out in raster order, so a stable sort keeps ties deterministic.
    std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) { return a.area > b.area; });
    std::vector<BoundingBox> boxes;
    boxes.reserve(comps.size());
    for (const auto& c : comps) boxes.push_back(c.box);
    return boxes;
}

BackHeadPatch extract_backhead_patch(const AmFmField& field, const BoundingBox& box, int frame_index) {
    return {crop_patch(field.am, box), crop_patch(field.if_magnitude(), box), box, frame_index};
}

GroupDecision classify_backhead(const BackHeadPatch& patch, const BackHeadConfig& cfg, const ExternalScores* external) {
    double score = 0.0;
    if (cfg.scorer == ScorerKind::ExternalScores) {
        std::optional<double> s = external ? external->lookup(patch.frame, patch.box) : std::nullopt;
        if (!s)
            throw Error(ErrorCode::MissingExternalScore,
                        "no external score for back-of-head candidate on frame " + std::to_string(patch.frame));
        score = *s;
    } else {
        auto am = patch.am.values();
        auto f = patch.if_mag.values();
        const float peak = am.empty() ? 0.0f : *std::max_element(am.begin(), am.end());
        if (peak > 0.0f) {
            double in_band = 0.0, total = 0.0;
            for (std::size_t i = 0; i < am.size(); ++i) {
                const double wgt = am[i] / peak;
                total += wgt;
                if (f[i] >= cfg.if_band_low && f[i] <= cfg.if_band_high) in_band += wgt;
            }
            score = total > 0.0 ? std::clamp(in_band / total, 0.0, 1.0) : 0.0;
        }
    }
    return {score >= cfg.score_threshold, score};
}

std::vector<Detection> detect_backheads(const AmFmField& field, int frame_index, const BackHeadConfig& cfg,
                                        const ExternalScores* external) {
    std::vector<Detection> out;
    for (const BoundingBox& box : candidate_regions(field, cfg)) {
        const GroupDecision d = classify_backhead(extract_backhead_patch(field, box, frame_index), cfg, external);
        if (!d.in_group) continue;
        Detection det(frame_index, box, DetectionKind::BackOfHead, d.score);
        out.push_back(det);
    }
    return out;
}

}  // namespace groupdet
