#include "groupdet/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <png.h>

#include "json.hpp"

namespace groupdet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

// Calls fn(json, line_number) for every non-blank line.
template <typename Fn>
void for_each_record(const std::string& text, const std::string& source, Fn&& fn) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (blank(line)) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(source, line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object()) throw ParseError(source, line_no, "record is not a JSON object");
        fn(j, line_no);
    }
}

int integer_field(const json& j, const char* key, const std::string& source, int line) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(source, line, std::string("missing field \"") + key + "\"");
    if (it->is_number_integer()) {
        const auto v = it->get<std::int64_t>();
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
            throw ParseError(source, line, std::string("field \"") + key + "\" out of range");
        return static_cast<int>(v);
    }
    if (it->is_number_float()) {
        const double v = it->get<double>();
        if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 2e9) return static_cast<int>(v);
        throw ParseError(source, line, std::string("field \"") + key + "\" must be an integer pixel value");
    }
    throw ParseError(source, line, std::string("field \"") + key + "\" must be a number");
}

struct BoxFields {
    int frame;
    BoundingBox box;
};

BoxFields box_fields(const json& j, const std::string& source, int line) {
    BoxFields f{integer_field(j, "frame", source, line),
                {integer_field(j, "x", source, line), integer_field(j, "y", source, line),
                 integer_field(j, "w", source, line), integer_field(j, "h", source, line)}};
    if (f.frame < 0) throw ParseError(source, line, "frame must be >= 0");
    if (f.box.w <= 0) throw ParseError(source, line, "w must be > 0");
    if (f.box.h <= 0) throw ParseError(source, line, "h must be > 0");
    return f;
}

double score_field(const json& j, const std::string& source, int line, bool required) {
    auto it = j.find("score");
    if (it == j.end()) {
        if (required) throw ParseError(source, line, "missing field \"score\"");
        return 1.0;
    }
    if (!it->is_number()) throw ParseError(source, line, "score must be a number");
    const double s = it->get<double>();
    if (!(s >= 0.0 && s <= 1.0)) throw ParseError(source, line, "score must lie in [0,1]");
    return s;
}

json box_json(int frame, const BoundingBox& b) {
    json j;
    j["frame"] = frame;
    j["x"] = b.x;
    j["y"] = b.y;
    j["w"] = b.w;
    j["h"] = b.h;
    return j;
}

}  // namespace

DetectionSet parse_detections(const std::string& text, const std::string& source, const std::string& video_id) {
    DetectionSet set(video_id);
    for_each_record(text, source, [&](const json& j, int line) {
        const BoxFields f = box_fields(j, source, line);
        auto kind_it = j.find("kind");
        if (kind_it == j.end()) throw ParseError(source, line, "missing field \"kind\"");
        if (!kind_it->is_string()) throw ParseError(source, line, "kind must be a string");
        const auto kind_str = kind_it->get<std::string>();
        DetectionKind kind;
        if (kind_str == "face")
            kind = DetectionKind::Face;
        else if (kind_str == "backhead")
            kind = DetectionKind::BackOfHead;
        else
            throw ParseError(source, line, "unknown kind \"" + kind_str + "\"");

        Detection d(f.frame, f.box, kind, score_field(j, source, line, false));
        if (auto g = j.find("in_group"); g != j.end() && !g->is_null()) {
            if (!g->is_string()) throw ParseError(source, line, "in_group must be \"in\" or \"out\"");
            const auto s = g->get<std::string>();
            if (s == "in")
                d.set_in_group(GroupLabel::InGroup);
            else if (s == "out")
                d.set_in_group(GroupLabel::OutOfGroup);
            else
                throw ParseError(source, line, "in_group must be \"in\" or \"out\"");
        }
        set.add(std::move(d));
    });
    return set;
}

DetectionSet read_detections(const fs::path& path, const std::string& video_id) {
    return parse_detections(read_text(path), path.string(), video_id);
}

std::string format_detections(const DetectionSet& set) {
    std::string out;
    for (const Detection& d : set) {
        json j = box_json(d.frame_index(), d.box());
        j["kind"] = to_string(d.kind());
        j["score"] = d.score();
        if (d.in_group() != GroupLabel::Unclassified) j["in_group"] = to_string(d.in_group());
        out += j.dump();
        out += '\n';
    }
    return out;
}

void write_detections(const fs::path& path, const DetectionSet& set) {
    write_file_atomic(path, format_detections(set));
}

GroundTruth parse_ground_truth(const std::string& text, const std::string& source) {
    GroundTruth gt;
    for_each_record(text, source, [&](const json& j, int line) {
        const BoxFields f = box_fields(j, source, line);
        GroundTruthRecord r{f.frame, f.box, std::nullopt};
        if (auto p = j.find("person_id"); p != j.end() && !p->is_null()) {
            if (p->is_string())
                r.person_id = p->get<std::string>();
            else if (p->is_number_integer())
                r.person_id = std::to_string(p->get<std::int64_t>());
            else
                throw ParseError(source, line, "person_id must be a string");
        }
        gt[f.frame].push_back(std::move(r));
    });
    return gt;
}

GroundTruth read_ground_truth(const fs::path& path) {
    return parse_ground_truth(read_text(path), path.string());
}

std::string format_ground_truth(const GroundTruth& gt) {
    std::string out;
    for (const auto& [frame, records] : gt)
        for (const auto& r : records) {
            json j = box_json(frame, r.box);
            if (r.person_id) j["person_id"] = *r.person_id;
            out += j.dump();
            out += '\n';
        }
    return out;
}

void ExternalScores::set(int frame, const BoundingBox& box, double score) {
    scores_[{frame, box.x, box.y, box.w, box.h}] = score;
}

std::optional<double> ExternalScores::lookup(int frame, const BoundingBox& box) const {
    auto it = scores_.find({frame, box.x, box.y, box.w, box.h});
    if (it == scores_.end()) return std::nullopt;
    return it->second;
}

ExternalScores parse_external_scores(const std::string& text, const std::string& source) {
    ExternalScores scores;
    for_each_record(text, source, [&](const json& j, int line) {
        const BoxFields f = box_fields(j, source, line);
        scores.set(f.frame, f.box, score_field(j, source, line, true));
    });
    return scores;
}

ExternalScores read_external_scores(const fs::path& path) {
    return parse_external_scores(read_text(path), path.string());
}

// ---------------------------------------------------------------------------

std::array<std::uint8_t, 3> RgbImage::pixel(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {data[i], data[i + 1], data[i + 2]};
}

void RgbImage::set_pixel(int x, int y, std::array<std::uint8_t, 3> rgb) {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    data[i] = rgb[0];
    data[i + 1] = rgb[1];
    data[i + 2] = rgb[2];
}

namespace {

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

[[noreturn]] void unreadable(const fs::path& path, const std::string& why) {
    throw Error(ErrorCode::UnreadableImage, "unreadable image " + path.string() + ": " + why);
}

RasterF32 read_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) unreadable(path, "cannot open");
    auto token = [&]() {
        std::string t;
        char c;
        while (in.get(c)) {
            if (c == '#') {
                std::string skip;
                std::getline(in, skip);
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!t.empty()) break;
                continue;
            }
            t += c;
        }
        return t;
    };
    if (token() != "P5") unreadable(path, "not a binary PGM (P5)");
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(token());
        h = std::stoi(token());
        maxval = std::stoi(token());
    } catch (const std::exception&) {
        unreadable(path, "bad PGM header");
    }
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) unreadable(path, "bad PGM header");
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * bytes);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
        unreadable(path, "truncated pixel data");
    RasterF32 out(w, h);
    auto dst = out.values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const int v = bytes == 1 ? buf[i] : (buf[2 * i] << 8) | buf[2 * i + 1];
        dst[i] = static_cast<float>(static_cast<double>(v) / maxval);
    }
    return out;
}

RasterF32 read_png_luma(const fs::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) unreadable(path, image.message);
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int w = static_cast<int>(image.width);
    const int h = static_cast<int>(image.height);
    std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        std::string why = image.message;
        png_image_free(&image);
        unreadable(path, why);
    }
    RasterF32 out(w, h);
    auto dst = out.values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        double y;
        if (color)
            y = (kLumaR * buf[3 * i] + kLumaG * buf[3 * i + 1] + kLumaB * buf[3 * i + 2]) / 255.0;
        else
            y = buf[i] / 255.0;
        dst[i] = static_cast<float>(std::min(y, 1.0));
    }
    return out;
}

std::string lower_ext(const fs::path& p) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e;
}

std::uint8_t quantize(float v) {
    const float c = std::isfinite(v) ? std::clamp(v, 0.0f, 1.0f) : 0.0f;
    return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

fs::path temp_sibling(const fs::path& path) {
    fs::path tmp = path;
    tmp += ".tmp";
    return tmp;
}

void commit(const fs::path& tmp, const fs::path& path) {
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
}

void write_png(const fs::path& path, int w, int h, png_uint_32 format, const void* data) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(w);
    image.height = static_cast<png_uint_32>(h);
    image.format = format;
    const fs::path tmp = temp_sibling(path);
    if (!png_image_write_to_file(&image, tmp.c_str(), 0, data, 0, nullptr))
        throw Error(ErrorCode::IoError, "cannot write " + path.string() + ": " + image.message);
    commit(tmp, path);
}

}  // namespace

RasterF32 read_luma_image(const fs::path& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".pgm") return read_pgm(path);
    if (ext == ".png") return read_png_luma(path);
    unreadable(path, "unsupported extension (expected .png or .pgm)");
}

void write_gray_png(const fs::path& path, const RasterF32& img) {
    std::vector<std::uint8_t> buf(img.size());
    std::transform(img.values().begin(), img.values().end(), buf.begin(), quantize);
    write_png(path, img.width(), img.height(), PNG_FORMAT_GRAY, buf.data());
}

void write_gray_pgm(const fs::path& path, const RasterF32& img) {
    std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    for (float v : img.values()) out += static_cast<char>(quantize(v));
    write_file_atomic(path, out);
}

void write_rgb_png(const fs::path& path, const RgbImage& img) {
    write_png(path, img.width, img.height, PNG_FORMAT_RGB, img.data.data());
}

RgbImage read_rgb_png(const fs::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) unreadable(path, image.message);
    image.format = PNG_FORMAT_RGB;
    RgbImage out(static_cast<int>(image.width), static_cast<int>(image.height));
    if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
        std::string why = image.message;
        png_image_free(&image);
        unreadable(path, why);
    }
    return out;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
    const fs::path tmp = temp_sibling(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    commit(tmp, path);
}

// ---------------------------------------------------------------------------

FrameSequence::FrameSequence(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw Error(ErrorCode::IoError, "frame directory " + dir.string() + " does not exist");
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) paths.push_back(entry.path());
    index_files(std::move(paths));
}

FrameSequence::FrameSequence(std::vector<fs::path> files) { index_files(std::move(files)); }

void FrameSequence::index_files(std::vector<fs::path> paths) {
    for (auto& p : paths) {
        const std::string ext = lower_ext(p);
        if (ext != ".png" && ext != ".pgm") continue;
        const std::string stem = p.stem().string();
        if (stem.empty() || stem.size() > 9 ||
            !std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); }))
            continue;
        files_.push_back({std::stoi(stem), std::move(p)});
    }
    std::sort(files_.begin(), files_.end(), [](const FrameFile& a, const FrameFile& b) {
        return a.index != b.index ? a.index < b.index : a.path < b.path;
    });
    for (std::size_t i = 1; i < files_.size(); ++i)
        if (files_[i].index == files_[i - 1].index)
            throw Error(ErrorCode::InvalidArgument, "frames " + files_[i - 1].path.string() + " and " +
                                                        files_[i].path.string() + " share index " +
                                                        std::to_string(files_[i].index));
}

const FrameFile* FrameSequence::find(int frame_index) const {
    auto it = std::lower_bound(files_.begin(), files_.end(), frame_index,
                               [](const FrameFile& f, int i) { return f.index < i; });
    if (it == files_.end() || it->index != frame_index) return nullptr;
    return &*it;
}

bool FrameSequence::contains(int frame_index) const { return find(frame_index) != nullptr; }

RasterF32 FrameSequence::load(int frame_index, std::optional<std::pair<int, int>> expected) const {
    const FrameFile* f = find(frame_index);
    if (!f) throw Error(ErrorCode::IndexOutOfRange, "no frame with index " + std::to_string(frame_index));
    RasterF32 img = read_luma_image(f->path);
    if (expected && (img.width() != expected->first || img.height() != expected->second))
        throw Error(ErrorCode::DimensionMismatch,
                    f->path.string() + " is " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                        ", expected " + std::to_string(expected->first) + "x" + std::to_string(expected->second));
    return img;
}

std::optional<std::pair<int, RasterF32>> FrameSequence::next() {
    if (cursor_ >= files_.size()) return std::nullopt;
    const FrameFile& f = files_[cursor_++];
    RasterF32 img = load(f.index, dims_);
    if (!dims_) dims_ = std::make_pair(img.width(), img.height());
    return std::make_pair(f.index, std::move(img));
}

}  // namespace groupdet
