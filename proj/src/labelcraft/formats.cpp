#include "crowdnoise/labelcraft/formats.hpp"

#include "crowdnoise/binary_io.hpp"
#include "crowdnoise/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>

namespace crowdnoise::labelcraft {

namespace {

// Reads one whitespace/comment-delimited ASCII token from a PGM header.
std::string pgm_token(const std::vector<std::uint8_t>& b, std::size_t& pos, const std::string& origin) {
    while (pos < b.size()) {
        if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else if (std::isspace(b[pos])) {
            ++pos;
        } else {
            break;
        }
    }
    std::string tok;
    while (pos < b.size() && !std::isspace(b[pos])) tok.push_back(static_cast<char>(b[pos++]));
    if (tok.empty()) throw IoError(origin, "truncated PGM header");
    return tok;
}

std::size_t pgm_number(const std::vector<std::uint8_t>& b, std::size_t& pos, const std::string& origin) {
    const std::string tok = pgm_token(b, pos, origin);
    if (!std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        throw IoError(origin, "bad PGM header field '" + tok + "'");
    }
    return std::stoul(tok);
}

}  // namespace

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
    const std::string header =
        "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + image.values.size());
    for (float v : image.values) {
        const float c = std::clamp(v, 0.0f, 1.0f);
        out.push_back(static_cast<std::uint8_t>(std::lround(c * 255.0f)));
    }
    return out;
}

GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
    std::size_t pos = 0;
    if (pgm_token(bytes, pos, origin) != "P5") throw IoError(origin, "not a binary PGM (P5)");
    const std::size_t w = pgm_number(bytes, pos, origin);
    const std::size_t h = pgm_number(bytes, pos, origin);
    const std::size_t maxval = pgm_number(bytes, pos, origin);
    if (maxval != 255) throw IoError(origin, "only 8-bit PGM (maxval 255) is supported");
    ++pos;  // single whitespace after maxval
    if (bytes.size() < pos + w * h) throw IoError(origin, "truncated PGM pixel data");
    GrayImage img(h, w);
    for (std::size_t i = 0; i < w * h; ++i) img.values[i] = static_cast<float>(bytes[pos + i]) / 255.0f;
    return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) { io::write_file(path, encode_pgm(image)); }

GrayImage read_pgm(const std::filesystem::path& path) { return decode_pgm(io::read_file(path), path.string()); }

std::string encode_annotation(const DotAnnotation& dots) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : dots.points) arr.push_back({p.x, p.y});
    return arr.dump() + "\n";
}

DotAnnotation decode_annotation(const std::string& text, std::string image_id, const std::string& origin) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(origin, e.what());
    }
    if (!j.is_array()) throw IoError(origin, "annotation must be a JSON array of [x, y] pairs");
    DotAnnotation dots;
    dots.image_id = std::move(image_id);
    dots.points.reserve(j.size());
    for (const auto& item : j) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number()) {
            throw IoError(origin, "annotation entry is not an [x, y] pair: " + item.dump());
        }
        dots.points.push_back({item[0].get<double>(), item[1].get<double>()});
    }
    return dots;
}

void write_annotation(const std::filesystem::path& path, const DotAnnotation& dots) {
    io::write_text(path, encode_annotation(dots));
}

DotAnnotation read_annotation(const std::filesystem::path& path, std::string image_id) {
    return decode_annotation(io::read_text(path), std::move(image_id), path.string());
}

std::vector<std::uint8_t> encode_density(const DensityMap& map) {
    io::ByteWriter w;
    w.text("DMAP");
    w.u32(kDensityFormatVersion);
    w.u32(static_cast<std::uint32_t>(map.height));
    w.u32(static_cast<std::uint32_t>(map.width));
    for (double v : map.values) w.f32(static_cast<float>(v));
    return w.data();
}

DensityMap decode_density(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
    io::ByteReader r(bytes, origin);
    if (r.text(4) != "DMAP") throw IoError(origin, "bad density-map magic");
    const std::uint32_t version = r.u32();
    if (version != kDensityFormatVersion) {
        throw IoError(origin, "unsupported density-map version " + std::to_string(version));
    }
    const std::uint32_t h = r.u32();
    const std::uint32_t w = r.u32();
    if (r.remaining() != std::size_t(h) * w * 4) throw IoError(origin, "density payload size mismatch");
    DensityMap map(h, w);
    for (double& v : map.values) v = r.f32();
    return map;
}

void write_density(const std::filesystem::path& path, const DensityMap& map) {
    io::write_file(path, encode_density(map));
}

DensityMap read_density(const std::filesystem::path& path) {
    return decode_density(io::read_file(path), path.string());
}

}  // namespace crowdnoise::labelcraft
