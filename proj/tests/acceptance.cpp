// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "groupdet/demod.hpp"
#include "groupdet/eval.hpp"
#include "groupdet/group_filter.hpp"
#include "groupdet/synth.hpp"
#include "oracles.hpp"

using namespace groupdet;
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kBorder = 16;

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
    std::printf("[%s] %s %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    failures += !pass;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

/// Every regular file under `dir`, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
    return files;
}

int cli_run(std::vector<std::string> args) {
    args.insert(args.begin(), "groupdet");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (code != 0) std::fprintf(stderr, "command failed (%d): %s\n", code, err.str().c_str());
    return code;
}

struct Wave {
    double a, u, v;
};

/// Ten single components spanning the channel centres, several orientations.
std::vector<Wave> ac2_waves() {
    std::vector<Wave> waves;
    for (int i = 0; i < 10; ++i) {
        const double r = 0.0125 * std::pow(32.0, i / 9.0);
        const double theta = std::numbers::pi * ((i * 7) % 10) / 10.0;
        waves.push_back({0.3 + 0.07 * i, r * std::cos(theta), r * std::sin(theta)});
    }
    return waves;
}

std::string ac2_ac3(int threads) {
    const FilterBank bank = build_filterbank(256, 256);
    DemodOptions opts;
    opts.threads = threads;
    double worst_am = 0, worst_if = 0, worst_rms = 0;
    std::string bytes;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<AmFmField> fields;
    std::vector<RasterF32> inputs;
    for (const Wave& w : ac2_waves()) {
        inputs.push_back(synth::plane_wave(256, 256, w.a, w.u, w.v, 0.7));
        fields.push_back(dca_decompose(inputs.back(), bank, opts));
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto waves = ac2_waves();
    for (std::size_t k = 0; k < waves.size(); ++k) {
        const Wave& w = waves[k];
        const AmFmField& f = fields[k];
        const double if_true = kTwoPi * std::hypot(w.u, w.v);
        double err2 = 0, sig2 = 0;
        for (int y = kBorder; y < 256 - kBorder; ++y)
            for (int x = kBorder; x < 256 - kBorder; ++x) {
                worst_am = std::max(worst_am, std::abs(f.am.at(x, y) - w.a) / w.a);
                worst_if = std::max(worst_if, std::abs(std::hypot(f.if_u.at(x, y), f.if_v.at(x, y)) - if_true) / if_true);
                const double in = inputs[k].at(x, y);
                const double d = f.am.at(x, y) * f.fm_cos.at(x, y) - in;
                err2 += d * d;
                sig2 += in * in;
            }
        worst_rms = std::max(worst_rms, std::sqrt(err2 / sig2));
        for (const RasterF32* r : {&f.am, &f.fm_cos, &f.if_u, &f.if_v})
            bytes.append(reinterpret_cast<const char*>(r->values().data()), r->values().size_bytes());
    }
    if (threads == 1) {
        report("AC2", worst_am <= 0.05 && worst_if <= 0.05 && seconds < 10.0,
               fmt("demodulation oracle: 10 waves 0.0125-0.4 cyc/px, worst AM err %.2f%%, worst |IF| err %.2f%% "
                   "(tol 5%%), %.2f s (limit 10 s)",
                   100 * worst_am, 100 * worst_if, seconds));
        report("AC3", worst_rms <= 0.10,
               fmt("reconstruction am*cos(phi): worst interior relative RMS %.2f%% (tol 10%%)", 100 * worst_rms));
    }
    return bytes;
}

void ac1() {
    double worst = 0;
    for (const auto& row : fixtures::kPublishedCounts)
        worst = std::max(worst, std::abs(f1_score(row.tp, row.fp, row.fn) - row.printed_f1));
    report("AC1", worst <= 0.005,
           fmt("F1 replay of 8 published count rows: max |F1 - printed| = %.4f (tol 0.005); V1 YOLO %.4f, V2 proposed %.4f",
               worst, f1_score(1153959, 761976, 124527), f1_score(728110, 119140, 110140)));
}

std::string ac4(int threads) {
    DemodOptions opts;
    opts.threads = threads;
    const RasterF32 chirp = synth::linear_chirp(512, 256, 0.4, 0.02, 0.15);
    const RasterF32 half = synth::decimate2(chirp);
    auto median_if = [&](const RasterF32& img) {
        const AmFmField f = dca_decompose(img, build_filterbank(img.width(), img.height()), opts);
        std::vector<float> m;
        for (int y = kBorder; y < img.height() - kBorder; ++y)
            for (int x = kBorder; x < img.width() - kBorder; ++x)
                m.push_back(static_cast<float>(std::hypot(f.if_u.at(x, y), f.if_v.at(x, y))));
        return quantile(m, 0.5);
    };
    const double m1 = median_if(chirp), m2 = median_if(half);
    const double ratio = m2 / m1;
    if (threads == 1)
        report("AC4", std::abs(ratio - 2.0) <= 0.2,
               fmt("scale covariance: median |IF| %.4f -> %.4f after 2x decimation, ratio %.3f (expect 2 +/- 10%%)", m1, m2,
                   ratio));
    return fmt("%.17g %.17g", m1, m2);
}

std::string ac5(const fs::path& work, int threads) {
    const synth::Calibration cal = synth::calibrate_group_filter(synth::two_scale_calibration_set(1), 0.5, threads);
    synth::SceneSpec spec = synth::two_scale_calibration_set(2024, 20);
    spec.near_faces = 1;
    spec.far_faces = 1;
    const synth::SyntheticVideo video = synth::make_video(spec);
    const fs::path dir = work / ("ac5_t" + std::to_string(threads));
    synth::write_video(video, dir);
    const int code = cli_run({"filter", "--frames", (dir / "frames").string(), "--detections",
                              (dir / "detections.jsonl").string(), "-o", (dir / "filtered.jsonl").string(),
                              "--if-threshold", fmt("%.17g", cal.if_threshold), "--threads", std::to_string(threads)});
    int correct = 0, total = 0;
    if (code == 0) {
        for (const Detection& d : read_detections(dir / "filtered.jsonl")) {
            const auto& near = video.near_boxes[static_cast<std::size_t>(d.frame_index())];
            const bool is_near = std::find(near.begin(), near.end(), d.box()) != near.end();
            correct += d.in_group() == (is_near ? GroupLabel::InGroup : GroupLabel::OutOfGroup);
            ++total;
        }
    }
    if (threads == 1)
        report("AC5", code == 0 && total == 40 && correct == 40,
               fmt("group separation: threshold %.4f calibrated on seed 1, %d/%d correct on 20 near + 20 far faces "
                   "(seed 2024)",
                   cal.if_threshold, correct, total));
    return slurp(dir / "filtered.jsonl");
}

void ac6() {
    std::mt19937 rng(6);
    std::vector<BoundingBox> dets, gts;
    int agree = 0, nontrivial = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        fixtures::random_instance(rng, 6, dets, gts);
        std::vector<ScoredBox> sd;
        for (const auto& b : dets) sd.push_back({b, 1.0});
        const int best = oracle::max_matching_brute_force(dets, gts, 0.6);
        agree += match_frame(sd, gts, 0.6).tp == best;
        nontrivial += best > 0;
    }
    report("AC6", agree == 1000,
           fmt("matching oracle: %d/1000 random instances (<= 6 boxes per side, IOU 0.6, %d with matches) equal "
               "brute-force maximum",
               agree, nontrivial));
}

/// Runs decompose -> filter -> backhead -> fuse -> evaluate on a 50-frame video.
std::map<std::string, std::string> ac7(const fs::path& work, int threads) {
    const fs::path dir = work / ("ac7_t" + std::to_string(threads));
    synth::SceneSpec spec;  // 1 near face, 2 far faces, 1 back-of-head disk per frame
    spec.frames = 50;
    spec.seed = 7;
    spec.noise = 0.02;
    synth::write_video(synth::make_video(spec), dir);
    const std::string t = std::to_string(threads);
    const std::string frames = (dir / "frames").string();
    auto at = [&](const char* name) { return (dir / name).string(); };
    bool ok = cli_run({"decompose", "--frames", frames, "--out", at("amfm"), "--threads", t}) == 0;
    ok = ok && cli_run({"filter", "--frames", frames, "--detections", at("detections.jsonl"), "-o", at("faces.jsonl"),
                        "--drop-out-of-group", "--threads", t}) == 0;
    ok = ok && cli_run({"backhead", "--frames", frames, "-o", at("backheads.jsonl"), "--threads", t}) == 0;
    ok = ok && cli_run({"fuse", "--faces", at("faces.jsonl"), "--backheads", at("backheads.jsonl"), "-o",
                        at("fused.jsonl")}) == 0;
    ok = ok && cli_run({"evaluate", "--detections", at("fused.jsonl"), "--ground-truth", at("groundtruth.jsonl"),
                        "--json", at("pipeline_report.json"), "--threads", t}) == 0;
    ok = ok && cli_run({"evaluate", "--detections", at("detections.jsonl"), "--ground-truth", at("groundtruth.jsonl"),
                        "--json", at("baseline_report.json"), "--threads", t}) == 0;
    if (threads == 1) {
        double f_pipe = -1, f_base = -1;
        if (ok) {
            const EvalReport pipe = evaluate_video(read_detections(at("fused.jsonl")), read_ground_truth(at("groundtruth.jsonl")));
            const EvalReport base =
                evaluate_video(read_detections(at("detections.jsonl")), read_ground_truth(at("groundtruth.jsonl")));
            f_pipe = pipe.f1;
            f_base = base.f1;
        }
        report("AC7", ok && f_pipe > f_base,
               fmt("end-to-end 50 frames: pipeline F1 %.4f vs unfiltered detections F1 %.4f (require strictly greater)",
                   f_pipe, f_base));
    }
    return snapshot(dir);
}

}  // namespace

int main() {
    const fs::path work = fs::temp_directory_path() / ("groupdet_acceptance_" + std::to_string(std::random_device{}()));
    fs::create_directories(work);

    ac1();
    const std::string fields1 = ac2_ac3(1);
    const std::string chirp1 = ac4(1);
    const std::string filter1 = ac5(work, 1);
    ac6();
    const auto pipeline1 = ac7(work, 1);

    const std::string fields8 = ac2_ac3(8);
    const std::string chirp8 = ac4(8);
    const std::string filter8 = ac5(work, 8);
    const auto pipeline8 = ac7(work, 8);
    bool pipeline_same = pipeline1.size() == pipeline8.size();
    std::size_t compared = 0;
    for (const auto& [name, bytes] : pipeline1) {
        auto it = pipeline8.find(name);
        pipeline_same = pipeline_same && it != pipeline8.end() && it->second == bytes;
        ++compared;
    }
    report("AC8",
           fields1 == fields8 && chirp1 == chirp8 && filter1 == filter8 && pipeline_same && !filter1.empty(),
           fmt("determinism 1 vs 8 threads: demod fields %s, chirp medians %s, group filter output %s, "
               "%zu pipeline files %s",
               fields1 == fields8 ? "identical" : "DIFFER", chirp1 == chirp8 ? "identical" : "DIFFER",
               filter1 == filter8 ? "identical" : "DIFFER", compared, pipeline_same ? "identical" : "DIFFER"));

    fs::remove_all(work);
    std::printf("%d of 8 acceptance criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
