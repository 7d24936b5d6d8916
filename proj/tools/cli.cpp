#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <thread>

#include "groupdet/backhead.hpp"
#include "groupdet/demod.hpp"
#include "groupdet/eval.hpp"
#include "groupdet/filterbank.hpp"
#include "groupdet/fusion.hpp"
#include "groupdet/group_filter.hpp"
#include "groupdet/io.hpp"
#include "groupdet/parallel.hpp"
#include "groupdet/synth.hpp"
#include "overlay.hpp"

namespace groupdet::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
    int threads = 0;
    std::string filterbank_config;
    std::string video_id;

    int worker_count() const {
        if (threads > 0) return threads;
        return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }

    FilterbankSpec filterbank() const {
        return filterbank_config.empty() ? FilterbankSpec{} : FilterbankSpec{read_filterbank_layout(filterbank_config)};
    }
};

void add_threads(CLI::App* cmd, Common& c) {
    cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

void add_filterbank(CLI::App* cmd, Common& c) {
    cmd->add_option("--filterbank-config", c.filterbank_config, "JSON filterbank layout");
}

void add_video_id(CLI::App* cmd, Common& c) {
    cmd->add_option("--video-id", c.video_id, "Video identifier attached to detections");
}

ScorerKind parse_scorer(const std::string& s) {
    return s == "external" ? ScorerKind::ExternalScores : ScorerKind::BaselineFrequency;
}

/// Demodulation of frames loaded on demand, with a bank sized by the first frame.
class FrameFields {
public:
    FrameFields(const FrameSequence& frames, const FilterbankSpec& spec) : frames_(frames) {
        if (!frames.empty()) {
            const RasterF32 first = read_luma_image(frames.files().front().path);
            dims_ = {first.width(), first.height()};
            bank_.emplace(build_filterbank(first.width(), first.height(), spec));
        }
    }

    AmFmField operator()(int frame_index) const {
        if (!bank_) throw Error(ErrorCode::IoError, "no frames available");
        return dca_decompose(frames_.load(frame_index, dims_), *bank_);
    }

private:
    const FrameSequence& frames_;
    std::pair<int, int> dims_{0, 0};
    std::optional<FilterBank> bank_;
};

RasterF32 normalized_am(const RasterF32& am) {
    const float peak = *std::max_element(am.values().begin(), am.values().end());
    RasterF32 out = am;
    if (peak > 0.0f)
        for (float& v : out.values()) v /= peak;
    return out;
}

int cmd_decompose(const fs::path& frames_dir, const fs::path& out_dir, const Common& c, std::ostream& err) {
    const FrameSequence frames(frames_dir);
    if (frames.empty()) {
        err << "warning: no frames in " << frames_dir.string() << "\n";
        return kSuccess;
    }
    fs::create_directories(out_dir);
    const FrameFields fields(frames, c.filterbank());
    parallel_for(frames.size(), c.worker_count(), [&](std::size_t i) {
        const FrameFile& f = frames.files()[i];
        const AmFmField field = fields(f.index);
        const std::string stem = f.path.stem().string();
        write_gray_png(out_dir / (stem + "_am.png"), normalized_am(field.am));
        write_gray_png(out_dir / (stem + "_fm.png"), fm_image(field));
    });
    return kSuccess;
}

int cmd_filter(const fs::path& frames_dir, const fs::path& dets_path, const fs::path& out_path,
               const GroupFilterConfig& cfg, bool drop, const Common& c) {
    cfg.validate();
    const FrameSequence frames(frames_dir);
    const DetectionSet dets = read_detections(dets_path, c.video_id);
    std::optional<ExternalScores> external;
    if (cfg.scorer == ScorerKind::ExternalScores) external = read_external_scores(cfg.scores_file);
    const FrameFields fields(frames, c.filterbank());
    DetectionSet out = filter_detections(
        dets, [&](int f) { return fields(f); }, cfg, external ? &*external : nullptr, c.worker_count());
    if (drop) out = drop_out_of_group(out);
    write_detections(out_path, out);
    return kSuccess;
}

int cmd_backhead(const fs::path& frames_dir, const fs::path& out_path, const BackHeadConfig& cfg, const Common& c) {
    cfg.validate();
    const FrameSequence frames(frames_dir);
    std::optional<ExternalScores> external;
    if (cfg.scorer == ScorerKind::ExternalScores) external = read_external_scores(cfg.scores_file);
    const FrameFields fields(frames, c.filterbank());
    std::vector<std::vector<Detection>> per_frame(frames.size());
    parallel_for(frames.size(), c.worker_count(), [&](std::size_t i) {
        const int index = frames.files()[i].index;
        per_frame[i] = detect_backheads(fields(index), index, cfg, external ? &*external : nullptr);
    });
    DetectionSet out(c.video_id);
    for (auto& dets : per_frame)
        for (auto& d : dets) out.add(std::move(d));
    write_detections(out_path, out);
    return kSuccess;
}

int cmd_fuse(const fs::path& faces, const fs::path& heads, const fs::path& out_path, double iou_dedup,
             const Common& c) {
    write_detections(out_path, fuse(read_detections(faces, c.video_id), read_detections(heads, c.video_id), iou_dedup));
    return kSuccess;
}

int cmd_evaluate(const std::string& dets_path, const std::string& gt_path, const std::vector<std::int64_t>& counts,
                 const std::string& json_path, double iou_min, const Common& c, std::ostream& out) {
    EvalReport report;
    if (!counts.empty()) {
        if (counts.size() != 3 || std::any_of(counts.begin(), counts.end(), [](auto v) { return v < 0; }))
            throw Error(ErrorCode::InvalidArgument, "--counts expects three non-negative integers TP,FP,FN");
        report.video_id = c.video_id;
        report.tp = counts[0];
        report.fp = counts[1];
        report.fn = counts[2];
        report.detected = report.tp + report.fp;
        report.labeled = report.tp + report.fn;
        finalize_report(report);
    } else {
        if (dets_path.empty() || gt_path.empty())
            throw Error(ErrorCode::InvalidArgument, "--detections and --ground-truth are required without --counts");
        report = evaluate_video(read_detections(dets_path, c.video_id), read_ground_truth(gt_path), iou_min,
                                c.worker_count());
    }
    out << format_report_table({report});
    if (!json_path.empty()) write_file_atomic(json_path, format_report_json(report));
    return kSuccess;
}

int cmd_overlay(const fs::path& frames_dir, const fs::path& dets_path, const std::string& gt_path,
                const fs::path& out_dir, double iou_min, const Common& c, std::ostream& err) {
    const FrameSequence frames(frames_dir);
    const DetectionSet dets = read_detections(dets_path, c.video_id);
    std::optional<GroundTruth> gt;
    if (!gt_path.empty()) gt = read_ground_truth(gt_path);
    if (frames.empty()) {
        err << "warning: no frames in " << frames_dir.string() << "\n";
        return kSuccess;
    }
    std::map<int, std::vector<std::size_t>> by_frame;
    for (std::size_t i = 0; i < dets.size(); ++i) by_frame[dets[i].frame_index()].push_back(i);
    fs::create_directories(out_dir);
    parallel_for(frames.size(), c.worker_count(), [&](std::size_t fi) {
        const FrameFile& f = frames.files()[fi];
        RgbImage img = to_rgb(read_luma_image(f.path));
        std::vector<BoundingBox> det_boxes;
        std::vector<ScoredBox> scored;
        if (auto it = by_frame.find(f.index); it != by_frame.end())
            for (std::size_t i : it->second) {
                det_boxes.push_back(dets[i].box());
                scored.push_back({dets[i].box(), dets[i].score()});
            }
        const std::vector<GroundTruthRecord>* labels = nullptr;
        if (gt)
            if (auto it = gt->find(f.index); it != gt->end()) labels = &it->second;
        if (!labels) {
            for (const auto& b : det_boxes) draw_box_outline(img, b, kGreen);
        } else {
            std::vector<BoundingBox> gt_boxes;
            for (const auto& r : *labels) gt_boxes.push_back(r.box);
            const FrameMatch m = match_frame(scored, gt_boxes, iou_min);
            std::vector<bool> det_hit(det_boxes.size()), gt_hit(gt_boxes.size());
            for (const auto& [d, g] : m.pairs) det_hit[d] = gt_hit[g] = true;
            for (std::size_t g = 0; g < gt_boxes.size(); ++g)
                if (!gt_hit[g]) draw_box_outline(img, gt_boxes[g], kYellow);
            for (std::size_t d = 0; d < det_boxes.size(); ++d) draw_box_outline(img, det_boxes[d], det_hit[d] ? kGreen : kRed);
        }
        write_rgb_png(out_dir / (f.path.stem().string() + ".png"), img);
    });
    return kSuccess;
}

int cmd_synth(const fs::path& out_dir, const synth::SceneSpec& spec) {
    synth::write_video(synth::make_video(spec), out_dir);
    return kSuccess;
}

int cmd_calibrate(std::uint64_t seed, int n_frames, double q, const Common& c, std::ostream& out) {
    const synth::Calibration cal =
        synth::calibrate_group_filter(synth::two_scale_calibration_set(seed, n_frames), q, c.worker_count());
    out << "near_samples " << cal.near_quantiles.size() << "\n"
        << "far_samples " << cal.far_quantiles.size() << "\n"
        << "if_threshold " << cal.if_threshold << "\n";
    return kSuccess;
}

/// TOML/INI reader that files keys outside any section under the subcommand
/// being run, so a config file can list plain option names.
class SubcommandConfig : public CLI::ConfigTOML {
public:
    explicit SubcommandConfig(std::string subcommand) : subcommand_(std::move(subcommand)) {}

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        std::vector<CLI::ConfigItem> items = CLI::ConfigTOML::from_config(input);
        if (!subcommand_.empty())
            for (auto& item : items)
                if (item.parents.empty()) item.parents = {subcommand_};
        return items;
    }

private:
    std::string subcommand_;
};

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::InvalidDimensions:
            return kUsage;
        default:
            return kData;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Student group detection from classroom video frames"};
    app.name(args.empty() ? "groupdet" : fs::path(args[0]).filename().string());
    app.require_subcommand(1);

    Common common;
    std::string frames_dir, out_dir, out_file, dets_path, gt_path, faces_path, heads_path, json_path;
    std::vector<std::int64_t> counts;
    double iou_min = kDefaultIouMin, iou_dedup = kDefaultIouDedup;

    app.set_config("--config", "", "Read option values from a TOML/INI file; command-line flags take precedence");
    app.fallthrough();
    auto with_config = [](CLI::App* cmd) {
        cmd->fallthrough();
        return cmd;
    };

    CLI::App* decompose = with_config(app.add_subcommand("decompose", "Write AM and FM images for every frame"));
    decompose->add_option("--frames", frames_dir, "Directory of numbered frames")->required();
    decompose->add_option("--out", out_dir, "Output directory")->required();
    add_threads(decompose, common);
    add_filterbank(decompose, common);

    GroupFilterConfig gcfg;
    std::string g_scorer = "baseline";
    bool drop = false;
    CLI::App* filter = with_config(app.add_subcommand("filter", "Label face detections in-group / out-of-group"));
    filter->add_option("--frames", frames_dir, "Directory of numbered frames")->required();
    filter->add_option("--detections", dets_path, "Face detections (JSONL)")->required();
    filter->add_option("-o,--out", out_file, "Output detections (JSONL)")->required();
    filter->add_option("--if-threshold", gcfg.if_threshold, "IF threshold in radians/pixel");
    filter->add_option("--quantile", gcfg.decision_quantile, "IF quantile used for the decision");
    filter->add_option("--scorer", g_scorer, "baseline or external")->check(CLI::IsMember({"baseline", "external"}));
    filter->add_option("--scores-file", gcfg.scores_file, "External scores (JSONL)");
    filter->add_option("--score-threshold", gcfg.score_threshold, "Minimum score for in-group");
    filter->add_flag("--drop-out-of-group", drop, "Remove out-of-group detections from the output");
    add_threads(filter, common);
    add_filterbank(filter, common);
    add_video_id(filter, common);

    BackHeadConfig bcfg;
    std::string b_scorer = "baseline";
    CLI::App* backhead = with_config(app.add_subcommand("backhead", "Detect back-of-head candidates"));
    backhead->add_option("--frames", frames_dir, "Directory of numbered frames")->required();
    backhead->add_option("-o,--out", out_file, "Output detections (JSONL)")->required();
    backhead->add_option("--if-band-low", bcfg.if_band_low, "Lower IF band edge, radians/pixel");
    backhead->add_option("--if-band-high", bcfg.if_band_high, "Upper IF band edge, radians/pixel");
    backhead->add_option("--min-am", bcfg.min_am, "AM threshold relative to the frame reference");
    backhead->add_option("--min-area", bcfg.min_region_area, "Minimum region area in pixels");
    backhead->add_option("--max-area", bcfg.max_region_area, "Maximum region area in pixels");
    backhead->add_option("--aspect-min", bcfg.aspect_min, "Minimum width/height");
    backhead->add_option("--aspect-max", bcfg.aspect_max, "Maximum width/height");
    backhead->add_option("--score-threshold", bcfg.score_threshold, "Minimum classifier score");
    backhead->add_option("--scorer", b_scorer, "baseline or external")->check(CLI::IsMember({"baseline", "external"}));
    backhead->add_option("--scores-file", bcfg.scores_file, "External scores (JSONL)");
    add_threads(backhead, common);
    add_filterbank(backhead, common);
    add_video_id(backhead, common);

    CLI::App* fuse_cmd = with_config(app.add_subcommand("fuse", "Merge face and back-of-head detections"));
    fuse_cmd->add_option("--faces", faces_path, "Filtered face detections (JSONL)")->required();
    fuse_cmd->add_option("--backheads", heads_path, "Back-of-head detections (JSONL)")->required();
    fuse_cmd->add_option("-o,--out", out_file, "Output detections (JSONL)")->required();
    fuse_cmd->add_option("--iou-dedup", iou_dedup, "Drop back-of-head boxes overlapping a face at this IOU");
    add_video_id(fuse_cmd, common);

    CLI::App* evaluate = with_config(app.add_subcommand("evaluate", "Score detections against ground truth"));
    evaluate->add_option("--detections", dets_path, "Detections (JSONL)");
    evaluate->add_option("--ground-truth", gt_path, "Ground truth (JSONL)");
    evaluate->add_option("--counts", counts, "Report for given TP,FP,FN instead of matching")->delimiter(',');
    evaluate->add_option("--json", json_path, "Also write the report as JSON");
    evaluate->add_option("--iou-min", iou_min, "Minimum IOU for a match");
    add_threads(evaluate, common);
    add_video_id(evaluate, common);

    CLI::App* overlay = with_config(app.add_subcommand("overlay", "Draw detections on frames"));
    overlay->add_option("--frames", frames_dir, "Directory of numbered frames")->required();
    overlay->add_option("--detections", dets_path, "Detections (JSONL)")->required();
    overlay->add_option("--ground-truth", gt_path, "Ground truth (JSONL); enables TP/FP/FN colours");
    overlay->add_option("--out", out_dir, "Output directory")->required();
    overlay->add_option("--iou-min", iou_min, "Minimum IOU for a match");
    add_threads(overlay, common);
    add_video_id(overlay, common);

    synth::SceneSpec scene;
    CLI::App* synth_cmd = with_config(app.add_subcommand("synth", "Generate a synthetic classroom video"));
    synth_cmd->add_option("--out", out_dir, "Output directory")->required();
    synth_cmd->add_option("--seed", scene.seed, "Random seed");
    synth_cmd->add_option("--frames", scene.frames, "Number of frames")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--width", scene.width, "Frame width")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--height", scene.height, "Frame height")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--near-faces", scene.near_faces, "Near faces per frame")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--far-faces", scene.far_faces, "Far faces per frame")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--backheads", scene.backheads, "Back-of-head disks per frame")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--far-scale", scene.far_scale, "Distance scale of far faces");
    synth_cmd->add_option("--noise", scene.noise, "Uniform noise half-width");

    std::uint64_t cal_seed = 1;
    int cal_frames = 10;
    double cal_quantile = 0.5;
    CLI::App* calibrate = with_config(app.add_subcommand("calibrate", "Calibrate the IF threshold on synthetic faces"));
    calibrate->add_option("--seed", cal_seed, "Random seed");
    calibrate->add_option("--frames", cal_frames, "Number of frames")->check(CLI::PositiveNumber);
    calibrate->add_option("--quantile", cal_quantile, "IF quantile used for the decision");
    add_threads(calibrate, common);

    std::string active;
    for (std::size_t i = 1; i < args.size() && active.empty(); ++i)
        if (app.get_subcommand_no_throw(args[i]) != nullptr) active = args[i];
    app.config_formatter(std::make_shared<SubcommandConfig>(active));

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsage;
    }

    try {
        if (decompose->parsed()) return cmd_decompose(frames_dir, out_dir, common, err);
        if (filter->parsed()) {
            gcfg.scorer = parse_scorer(g_scorer);
            return cmd_filter(frames_dir, dets_path, out_file, gcfg, drop, common);
        }
        if (backhead->parsed()) {
            bcfg.scorer = parse_scorer(b_scorer);
            return cmd_backhead(frames_dir, out_file, bcfg, common);
        }
        if (fuse_cmd->parsed()) return cmd_fuse(faces_path, heads_path, out_file, iou_dedup, common);
        if (evaluate->parsed()) return cmd_evaluate(dets_path, gt_path, counts, json_path, iou_min, common, out);
        if (overlay->parsed()) return cmd_overlay(frames_dir, dets_path, gt_path, out_dir, iou_min, common, err);
        if (synth_cmd->parsed()) return cmd_synth(out_dir, scene);
        if (calibrate->parsed()) return cmd_calibrate(cal_seed, cal_frames, cal_quantile, common, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kInternal;
}

}  // namespace groupdet::cli
