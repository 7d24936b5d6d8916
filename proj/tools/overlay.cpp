#include "overlay.hpp"

#include <algorithm>
#include <cmath>

namespace groupdet::cli {

RgbImage to_rgb(const RasterF32& gray) {
    RgbImage img(gray.width(), gray.height());
    for (int y = 0; y < gray.height(); ++y)
        for (int x = 0; x < gray.width(); ++x) {
            const float v = std::isfinite(gray.at(x, y)) ? std::clamp(gray.at(x, y), 0.0f, 1.0f) : 0.0f;
            const auto q = static_cast<std::uint8_t>(std::lround(v * 255.0f));
            img.set_pixel(x, y, {q, q, q});
        }
    return img;
}

void draw_box_outline(RgbImage& img, const BoundingBox& box, Rgb color) {
    auto put = [&](int x, int y) {
        if (x >= 0 && y >= 0 && x < img.width && y < img.height) img.set_pixel(x, y, color);
    };
    const int x1 = box.right() - 1, y1 = box.bottom() - 1;
    for (int x = box.x; x <= x1; ++x) {
        put(x, box.y);
        put(x, y1);
    }
    for (int y = box.y; y <= y1; ++y) {
        put(box.x, y);
        put(x1, y);
    }
}

}  // namespace groupdet::cli
