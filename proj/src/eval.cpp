#include "groupdet/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <tuple>

#include "groupdet/parallel.hpp"
#include "json.hpp"

namespace groupdet {

namespace {

auto box_key(const BoundingBox& b) { return std::make_tuple(b.y, b.x, b.h, b.w); }

struct Edge {
    double iou;
    std::size_t det;  // canonical indices
    std::size_t gt;
};

// Kuhn augmenting path from canonical detection `d`.
bool augment_from(std::size_t d, const std::vector<std::vector<std::size_t>>& adj, std::vector<long>& gt_of_det,
                  std::vector<long>& det_of_gt, std::vector<char>& visited) {
    for (std::size_t g : adj[d]) {
        if (visited[g]) continue;
        visited[g] = 1;
        if (det_of_gt[g] < 0 ||
            augment_from(static_cast<std::size_t>(det_of_gt[g]), adj, gt_of_det, det_of_gt, visited)) {
            det_of_gt[g] = static_cast<long>(d);
            gt_of_det[d] = static_cast<long>(g);
            return true;
        }
    }
    return false;
}

}  // namespace

FrameMatch match_frame(const std::vector<ScoredBox>& dets, const std::vector<BoundingBox>& gts, double iou_min,
                       MatchOptions opts) {
    if (!(iou_min > 0.0 && iou_min <= 1.0)) throw Error(ErrorCode::InvalidArgument, "--iou-min must lie in (0,1]");

    std::vector<std::size_t> dord(dets.size());
    std::iota(dord.begin(), dord.end(), 0);
    std::stable_sort(dord.begin(), dord.end(), [&](std::size_t a, std::size_t b) {
        return std::make_tuple(box_key(dets[a].box), -dets[a].score) <
               std::make_tuple(box_key(dets[b].box), -dets[b].score);
    });
    std::vector<std::size_t> gord(gts.size());
    std::iota(gord.begin(), gord.end(), 0);
    std::stable_sort(gord.begin(), gord.end(),
                     [&](std::size_t a, std::size_t b) { return box_key(gts[a]) < box_key(gts[b]); });

    std::vector<Edge> edges;
    for (std::size_t i = 0; i < dord.size(); ++i)
        for (std::size_t j = 0; j < gord.size(); ++j) {
            const double v = iou(dets[dord[i]].box, gts[gord[j]]);
            if (v >= iou_min) edges.push_back({v, i, j});
        }
    std::sort(edges.begin(), edges.end(), [&](const Edge& a, const Edge& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        const double sa = dets[dord[a.det]].score, sb = dets[dord[b.det]].score;
        if (sa != sb) return sa > sb;
        if (a.det != b.det) return a.det < b.det;
        return a.gt < b.gt;
    });

    std::vector<long> gt_of_det(dord.size(), -1);
    std::vector<long> det_of_gt(gord.size(), -1);
    for (const Edge& e : edges) {
        if (gt_of_det[e.det] >= 0 || det_of_gt[e.gt] >= 0) continue;
        gt_of_det[e.det] = static_cast<long>(e.gt);
        det_of_gt[e.gt] = static_cast<long>(e.det);
    }

    if (opts.augment) {
        // Adjacency in the same preference order as the greedy pass.
        std::vector<std::vector<std::size_t>> adj(dord.size());
        for (const Edge& e : edges) adj[e.det].push_back(e.gt);
        std::vector<char> visited(gord.size());
        for (std::size_t d = 0; d < dord.size(); ++d) {
            if (gt_of_det[d] >= 0 || adj[d].empty()) continue;
            std::fill(visited.begin(), visited.end(), 0);
            augment_from(d, adj, gt_of_det, det_of_gt, visited);
        }
    }

    FrameMatch m;
    for (std::size_t d = 0; d < dord.size(); ++d)
        if (gt_of_det[d] >= 0) m.pairs.emplace_back(dord[d], gord[static_cast<std::size_t>(gt_of_det[d])]);
    std::sort(m.pairs.begin(), m.pairs.end());
    m.tp = static_cast<std::int64_t>(m.pairs.size());
    m.fp = static_cast<std::int64_t>(dets.size()) - m.tp;
    m.fn = static_cast<std::int64_t>(gts.size()) - m.tp;
    return m;
}

double f1_score(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
    const std::int64_t den = 2 * tp + fp + fn;
    return den == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(den);
}

void finalize_report(EvalReport& r) {
    r.precision = r.tp + r.fp == 0 ? 0.0 : static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
    r.recall = r.tp + r.fn == 0 ? 0.0 : static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
    r.f1 = f1_score(r.tp, r.fp, r.fn);
}

EvalReport evaluate_video(const DetectionSet& dets, const GroundTruth& gt, double iou_min, int threads,
                          MatchOptions opts) {
    std::vector<const std::pair<const int, std::vector<GroundTruthRecord>>*> frames;
    for (const auto& entry : gt) frames.push_back(&entry);

    const auto& dv = dets.detections();
    std::vector<FrameMatch> results(frames.size());
    parallel_for(frames.size(), threads, [&](std::size_t i) {
        const int frame = frames[i]->first;
        auto lo = std::lower_bound(dv.begin(), dv.end(), frame,
                                   [](const Detection& e, int f) { return e.frame_index() < f; });
        std::vector<ScoredBox> boxes;
        for (auto it = lo; it != dv.end() && it->frame_index() == frame; ++it)
            boxes.push_back({it->box(), it->score()});
        std::vector<BoundingBox> g;
        for (const auto& r : frames[i]->second) g.push_back(r.box);
        results[i] = match_frame(boxes, g, iou_min, opts);
    });

    EvalReport r;
    r.video_id = dets.video_id();
    r.frames_evaluated = static_cast<std::int64_t>(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        r.labeled += static_cast<std::int64_t>(frames[i]->second.size());
        r.tp += results[i].tp;
        r.fp += results[i].fp;
        r.fn += results[i].fn;
    }
    r.detected = r.tp + r.fp;
    finalize_report(r);
    return r;
}

std::string format_report_table(const std::vector<EvalReport>& reports) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-12s %8s %12s %12s %12s %12s %12s %8s %8s %8s\n", "Video", "Frames",
                  "Labeled", "Detected", "TP", "FP", "FN", "Prec", "Recall", "F1");
    out += buf;
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%-12s %8lld %12lld %12lld %12lld %12lld %12lld %8.4f %8.4f %8.4f\n",
                      r.video_id.empty() ? "-" : r.video_id.c_str(), static_cast<long long>(r.frames_evaluated),
                      static_cast<long long>(r.labeled), static_cast<long long>(r.detected),
                      static_cast<long long>(r.tp), static_cast<long long>(r.fp), static_cast<long long>(r.fn),
                      r.precision, r.recall, r.f1);
        out += buf;
    }
    return out;
}

std::string format_report_json(const EvalReport& r) {
    nlohmann::json j;
    j["video_id"] = r.video_id;
    j["frames_evaluated"] = r.frames_evaluated;
    j["labeled"] = r.labeled;
    j["detected"] = r.detected;
    j["tp"] = r.tp;
    j["fp"] = r.fp;
    j["fn"] = r.fn;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    return j.dump(2) + "\n";
}

}  // namespace groupdet
