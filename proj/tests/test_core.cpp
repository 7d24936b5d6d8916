#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "groupdet/core.hpp"
#include "oracles.hpp"

using namespace groupdet;

TEST(Iou, IdenticalBoxesIsOne) { EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0); }

TEST(Iou, DisjointBoxesIsZero) { EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {20, 20, 5, 5}), 0.0); }

TEST(Iou, HalfShiftedBox) {
    // intersection 5x10 = 50, union 100 + 100 - 50 = 150
    EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {5, 0, 10, 10}), 50.0 / 150.0);
}

TEST(Iou, TouchingEdgesDoNotOverlap) { EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {10, 0, 10, 10}), 0.0); }

TEST(Iou, PropertiesOnRandomBoxes) {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> pos(-20, 20), size(1, 25);
    for (int trial = 0; trial < 2000; ++trial) {
        BoundingBox a{pos(rng), pos(rng), size(rng), size(rng)};
        BoundingBox b{pos(rng), pos(rng), size(rng), size(rng)};
        const double v = iou(a, b);
        EXPECT_EQ(v, iou(b, a));
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        EXPECT_NEAR(v, oracle::iou_by_counting(a, b), 1e-12);
        EXPECT_EQ(v == 1.0, a == b);
    }
}

TEST(CropPatch, FullFrameIsCopy) {
    RasterF32 img(100, 100);
    for (int y = 0; y < 100; ++y)
        for (int x = 0; x < 100; ++x) img.at(x, y) = static_cast<float>(x + 100 * y);
    EXPECT_EQ(crop_patch(img, {0, 0, 100, 100}), img);
}

TEST(CropPatch, ClipsTopLeft) {
    RasterF32 img(100, 100);
    for (int y = 0; y < 100; ++y)
        for (int x = 0; x < 100; ++x) img.at(x, y) = static_cast<float>(x + 100 * y);
    RasterF32 p = crop_patch(img, {-5, -5, 10, 10});
    ASSERT_EQ(p.width(), 5);
    ASSERT_EQ(p.height(), 5);
    EXPECT_EQ(p.at(0, 0), img.at(0, 0));
    EXPECT_EQ(p.at(4, 4), img.at(4, 4));
}

TEST(CropPatch, ClipsBottomRight) {
    RasterF32 img(100, 100);
    for (int y = 0; y < 100; ++y)
        for (int x = 0; x < 100; ++x) img.at(x, y) = static_cast<float>(x + 100 * y);
    RasterF32 p = crop_patch(img, {90, 90, 20, 20});
    ASSERT_EQ(p.width(), 10);
    ASSERT_EQ(p.height(), 10);
    EXPECT_EQ(p.at(0, 0), img.at(90, 90));
    EXPECT_EQ(p.at(9, 9), img.at(99, 99));
}

TEST(CropPatch, EmptyIntersectionThrows) {
    RasterF32 img(10, 10);
    try {
        crop_patch(img, {10, 0, 5, 5});
        FAIL() << "expected EmptyIntersection";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyIntersection);
    }
}

TEST(CropPatch, Idempotent) {
    RasterF32 img(40, 30);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 40; ++x) img.at(x, y) = static_cast<float>(std::sin(x * 0.3) + y);
    RasterF32 p = crop_patch(img, {-3, 7, 20, 50});
    EXPECT_EQ(crop_patch(p, {0, 0, p.width(), p.height()}), p);
}

TEST(ResizeBilinear, ConstantStaysConstant) {
    RasterF32 img(7, 5, 0.5f);
    for (auto [w, h] : {std::pair{1, 1}, {3, 9}, {100, 100}, {13, 2}}) {
        RasterF32 r = resize_bilinear(img, w, h);
        for (float v : r.values()) EXPECT_EQ(v, 0.5f);
    }
}

TEST(ResizeBilinear, TwoByTwoRampToFourByFour) {
    RasterF32 img(2, 2, std::vector<float>{0.0f, 1.0f, 0.0f, 1.0f});
    RasterF32 r = resize_bilinear(img, 4, 4);
    // Pixel-centre sampling: source x = (i + 0.5) / 2 - 0.5 = -0.25, 0.25, 0.75, 1.25, clamped to [0, 1].
    const float expected[4] = {0.0f, 0.25f, 0.75f, 1.0f};
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) EXPECT_FLOAT_EQ(r.at(x, y), expected[x]) << x << "," << y;
}

TEST(ResizeBilinear, IdentityIsBitwiseEqual) {
    RasterF32 img(9, 4);
    for (int i = 0; i < 36; ++i) img.values()[static_cast<std::size_t>(i)] = std::sin(i * 1.7f);
    EXPECT_EQ(resize_bilinear(img, 9, 4), img);
}

TEST(ResizeBilinear, ZeroTargetThrows) {
    RasterF32 img(4, 4);
    EXPECT_THROW(resize_bilinear(img, 0, 4), Error);
    EXPECT_THROW(resize_bilinear(img, 4, 0), Error);
}

TEST(ResizeBilinear, NeverOvershootsInputRange) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<float> val(-5.0f, 5.0f);
    std::uniform_int_distribution<int> dim(1, 40);
    for (int trial = 0; trial < 200; ++trial) {
        RasterF32 img(dim(rng), dim(rng));
        for (float& v : img.values()) v = val(rng);
        const auto [lo, hi] = std::minmax_element(img.values().begin(), img.values().end());
        RasterF32 r = resize_bilinear(img, dim(rng), dim(rng));
        for (float v : r.values()) {
            EXPECT_GE(v, *lo);
            EXPECT_LE(v, *hi);
        }
    }
}

TEST(Raster, RejectsMismatchedData) {
    EXPECT_THROW(RasterF32(3, 3, std::vector<float>(8)), Error);
    EXPECT_THROW(RasterF32(0, 3), Error);
}

TEST(Detection, ValidatesScoreAndBox) {
    EXPECT_THROW(Detection(0, {0, 0, 0, 5}, DetectionKind::Face), Error);
    EXPECT_THROW(Detection(0, {0, 0, 5, 5}, DetectionKind::Face, 1.5), Error);
    EXPECT_THROW(Detection(-1, {0, 0, 5, 5}, DetectionKind::Face), Error);
    Detection d(3, {0, 0, 5, 5}, DetectionKind::BackOfHead, 0.2);
    EXPECT_EQ(d.in_group(), GroupLabel::Unclassified);
    EXPECT_EQ(d.kind(), DetectionKind::BackOfHead);
}

TEST(DetectionSet, KeepsFrameThenInsertionOrder) {
    DetectionSet s("v");
    s.add(Detection(2, {0, 0, 1, 1}, DetectionKind::Face, 0.1));
    s.add(Detection(0, {0, 0, 1, 1}, DetectionKind::Face, 0.2));
    s.add(Detection(2, {0, 0, 1, 1}, DetectionKind::Face, 0.3));
    s.add(Detection(1, {0, 0, 1, 1}, DetectionKind::Face, 0.4));
    ASSERT_EQ(s.size(), 4u);
    EXPECT_EQ(s[0].score(), 0.2);
    EXPECT_EQ(s[1].score(), 0.4);
    EXPECT_EQ(s[2].score(), 0.1);
    EXPECT_EQ(s[3].score(), 0.3);
}
