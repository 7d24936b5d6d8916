#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "groupdet/io.hpp"

using namespace groupdet;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("groupdet_io_" + std::to_string(std::random_device{}()) + "_" + std::to_string(counter_++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

}  // namespace

TEST(Detections, EmptyInputGivesEmptySet) {
    EXPECT_TRUE(parse_detections("", "empty.jsonl", "v").empty());
    EXPECT_TRUE(parse_detections("\n\n", "blank.jsonl", "v").empty());
}

TEST(Detections, SingleRecord) {
    const DetectionSet s =
        parse_detections(R"({"frame":3,"x":10,"y":20,"w":30,"h":40,"kind":"face","score":0.9})" "\n", "d", "vid");
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s.video_id(), "vid");
    EXPECT_EQ(s[0].frame_index(), 3);
    EXPECT_EQ(s[0].box(), (BoundingBox{10, 20, 30, 40}));
    EXPECT_EQ(s[0].kind(), DetectionKind::Face);
    EXPECT_DOUBLE_EQ(s[0].score(), 0.9);
    EXPECT_EQ(s[0].in_group(), GroupLabel::Unclassified);
}

TEST(Detections, ScoreDefaultsToOneAndInGroupIsRead) {
    const DetectionSet s = parse_detections(
        R"({"frame":0,"x":0,"y":0,"w":5,"h":5,"kind":"backhead","in_group":"out"})", "d", "v");
    ASSERT_EQ(s.size(), 1u);
    EXPECT_DOUBLE_EQ(s[0].score(), 1.0);
    EXPECT_EQ(s[0].kind(), DetectionKind::BackOfHead);
    EXPECT_EQ(s[0].in_group(), GroupLabel::OutOfGroup);
}

TEST(Detections, ZeroWidthIsParseErrorWithLine) {
    const std::string text = R"({"frame":0,"x":0,"y":0,"w":5,"h":5,"kind":"face"})"
                             "\n"
                             R"({"frame":0,"x":0,"y":0,"w":0,"h":5,"kind":"face"})"
                             "\n";
    try {
        parse_detections(text, "dets.jsonl", "v");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2);
        EXPECT_EQ(e.source(), "dets.jsonl");
        EXPECT_NE(std::string(e.what()).find("dets.jsonl:2:"), std::string::npos);
    }
}

TEST(Detections, MalformedRecordsAreRejected) {
    for (const char* bad : {R"({"frame":0,"x":0,"y":0,"w":5,"kind":"face"})",
                            R"({"frame":0,"x":0,"y":0,"w":5,"h":5,"kind":"hat"})",
                            R"({"frame":-1,"x":0,"y":0,"w":5,"h":5,"kind":"face"})",
                            R"({"frame":0,"x":0.5,"y":0,"w":5,"h":5,"kind":"face"})",
                            R"({"frame":0,"x":0,"y":0,"w":5,"h":5,"kind":"face","score":1.5})",
                            R"({"frame":0,"x":0,"y":0,"w":5,"h":5,"kind":"face","in_group":"maybe"})",
                            R"(not json)"}) {
        EXPECT_THROW(parse_detections(bad, "d", "v"), ParseError) << bad;
    }
}

TEST(Detections, IntegralFloatsAndCrlfAccepted) {
    const DetectionSet s =
        parse_detections("{\"frame\":1,\"x\":2.0,\"y\":3,\"w\":4,\"h\":5,\"kind\":\"face\"}\r\n", "d", "v");
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].box().x, 2);
}

TEST(Detections, RoundTripIsFixpoint) {
    DetectionSet s("v");
    s.add(Detection(4, {-3, 2, 10, 11}, DetectionKind::Face, 0.25));
    s.add(Detection(0, {1, 2, 3, 4}, DetectionKind::BackOfHead, 1.0));
    Detection labelled(0, {7, 7, 7, 7}, DetectionKind::Face, 0.125);
    labelled.set_in_group(GroupLabel::InGroup);
    s.add(labelled);
    const std::string once = format_detections(s);
    const DetectionSet back = parse_detections(once, "rt", "v");
    EXPECT_EQ(format_detections(back), once);
    ASSERT_EQ(back.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(back[i].box(), s[i].box());
        EXPECT_EQ(back[i].score(), s[i].score());
        EXPECT_EQ(back[i].in_group(), s[i].in_group());
    }
}

TEST(Detections, FileRoundTrip) {
    TempDir dir;
    DetectionSet s("clip");
    s.add(Detection(2, {5, 6, 7, 8}, DetectionKind::Face, 0.5));
    write_detections(dir.path() / "d.jsonl", s);
    const DetectionSet back = read_detections(dir.path() / "d.jsonl", "clip");
    EXPECT_EQ(format_detections(back), format_detections(s));
    EXPECT_THROW(read_detections(dir.path() / "missing.jsonl"), Error);
}

TEST(GroundTruth, DuplicatesKeptAndNegativeCoordinatesAllowed) {
    const std::string text = R"({"frame":2,"x":-4,"y":0,"w":10,"h":10})"
                             "\n"
                             R"({"frame":0,"x":1,"y":1,"w":2,"h":2,"person_id":7})"
                             "\n"
                             R"({"frame":2,"x":-4,"y":0,"w":10,"h":10})"
                             "\n";
    const GroundTruth gt = parse_ground_truth(text, "gt");
    ASSERT_EQ(gt.size(), 2u);
    EXPECT_EQ(gt.begin()->first, 0);
    EXPECT_EQ(gt.at(0).front().person_id, "7");
    ASSERT_EQ(gt.at(2).size(), 2u);
    EXPECT_EQ(gt.at(2)[0].box.x, -4);
    EXPECT_EQ(parse_ground_truth(format_ground_truth(gt), "gt2"), gt);
}

TEST(GroundTruth, ShuffledInputGivesSameResult) {
    std::vector<std::string> lines;
    for (int i = 0; i < 30; ++i)
        lines.push_back(R"({"frame":)" + std::to_string(i % 5) + R"(,"x":)" + std::to_string(i) +
                        R"(,"y":0,"w":3,"h":3})");
    std::string a;
    for (const auto& l : lines) a += l + "\n";
    std::mt19937 rng(5);
    std::shuffle(lines.begin(), lines.end(), rng);
    std::string b;
    for (const auto& l : lines) b += l + "\n";
    GroundTruth ga = parse_ground_truth(a, "a"), gb = parse_ground_truth(b, "b");
    for (auto* g : {&ga, &gb})
        for (auto& [f, recs] : *g)
            std::sort(recs.begin(), recs.end(), [](const auto& l, const auto& r) { return l.box.x < r.box.x; });
    EXPECT_EQ(ga, gb);
}

TEST(ExternalScores, LookupByFrameAndBox) {
    const ExternalScores s = parse_external_scores(R"({"frame":1,"x":2,"y":3,"w":4,"h":5,"score":0.75})", "s");
    EXPECT_EQ(s.lookup(1, {2, 3, 4, 5}), 0.75);
    EXPECT_FALSE(s.lookup(1, {2, 3, 4, 6}).has_value());
    EXPECT_THROW(parse_external_scores(R"({"frame":1,"x":2,"y":3,"w":4,"h":5})", "s"), ParseError);
}

TEST(Images, LumaFromRgbPng) {
    TempDir dir;
    RgbImage img(2, 1);
    img.set_pixel(0, 0, {255, 255, 255});
    img.set_pixel(1, 0, {255, 0, 0});
    write_rgb_png(dir.path() / "c.png", img);
    const RasterF32 luma = read_luma_image(dir.path() / "c.png");
    EXPECT_NEAR(luma.at(0, 0), 1.0f, 1e-6f);
    EXPECT_NEAR(luma.at(1, 0), 0.299f, 1e-6f);
    const RgbImage back = read_rgb_png(dir.path() / "c.png");
    EXPECT_EQ(back.data, img.data);
}

TEST(Images, GrayPngAndPgmRoundTrip) {
    TempDir dir;
    RasterF32 img(5, 3);
    for (int i = 0; i < 15; ++i) img.values()[static_cast<std::size_t>(i)] = static_cast<float>(i * 17) / 255.0f;
    write_gray_png(dir.path() / "g.png", img);
    write_gray_pgm(dir.path() / "g.pgm", img);
    for (const char* name : {"g.png", "g.pgm"}) {
        const RasterF32 back = read_luma_image(dir.path() / name);
        ASSERT_TRUE(back.same_shape(img));
        for (std::size_t i = 0; i < 15; ++i) EXPECT_NEAR(back.values()[i], img.values()[i], 1e-6f) << name;
    }
}

TEST(Images, UnreadableFile) {
    TempDir dir;
    write_text(dir.path() / "junk.png", "this is not a png");
    try {
        read_luma_image(dir.path() / "junk.png");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnreadableImage);
    }
    EXPECT_THROW(read_luma_image(dir.path() / "nope.png"), Error);
}

TEST(FrameSequence, NumericOrder) {
    TempDir dir;
    const RasterF32 img(16, 16, 0.5f);
    for (const char* name : {"010.png", "000.png", "001.pgm"}) {
        if (fs::path(name).extension() == ".pgm")
            write_gray_pgm(dir.path() / name, img);
        else
            write_gray_png(dir.path() / name, img);
    }
    write_text(dir.path() / "notes.txt", "ignored");
    FrameSequence seq(dir.path());
    ASSERT_EQ(seq.size(), 3u);
    EXPECT_EQ(seq.files()[0].index, 0);
    EXPECT_EQ(seq.files()[1].index, 1);
    EXPECT_EQ(seq.files()[2].index, 10);
    std::vector<int> seen;
    while (auto f = seq.next()) seen.push_back(f->first);
    EXPECT_EQ(seen, (std::vector<int>{0, 1, 10}));
    EXPECT_TRUE(seq.contains(10));
    EXPECT_FALSE(seq.contains(2));
}

TEST(FrameSequence, DimensionMismatchNamesFile) {
    TempDir dir;
    write_gray_png(dir.path() / "0.png", RasterF32(16, 16));
    write_gray_png(dir.path() / "1.png", RasterF32(17, 16));
    FrameSequence seq(dir.path());
    ASSERT_TRUE(seq.next().has_value());
    try {
        seq.next();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
        EXPECT_NE(std::string(e.what()).find("1.png"), std::string::npos);
    }
}

TEST(FrameSequence, MissingDirectory) {
    EXPECT_THROW(FrameSequence(fs::path("/nonexistent/groupdet/frames")), Error);
}

TEST(WriteFileAtomic, ReplacesContents) {
    TempDir dir;
    write_file_atomic(dir.path() / "a.txt", "one");
    write_file_atomic(dir.path() / "a.txt", "two");
    std::ifstream in(dir.path() / "a.txt");
    std::string s;
    in >> s;
    EXPECT_EQ(s, "two");
    EXPECT_EQ(std::distance(fs::directory_iterator(dir.path()), fs::directory_iterator{}), 1);
}
