#pragma once

#include "crowdnoise/labelcraft/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace crowdnoise::labelcraft {

inline constexpr std::uint32_t kDensityFormatVersion = 1;

// Binary PGM (P5), 8-bit, maxval 255. Intensities are quantized with rounding.
std::vector<std::uint8_t> encode_pgm(const GrayImage& image);
GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes, const std::string& origin = "<memory>");
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
GrayImage read_pgm(const std::filesystem::path& path);

// Annotation file: JSON array of [x, y] pairs.
std::string encode_annotation(const DotAnnotation& dots);
DotAnnotation decode_annotation(const std::string& text, std::string image_id, const std::string& origin = "<memory>");
void write_annotation(const std::filesystem::path& path, const DotAnnotation& dots);
DotAnnotation read_annotation(const std::filesystem::path& path, std::string image_id);

// Density file: "DMAP", u32 version, u32 height, u32 width, binary32 values (all little-endian).
std::vector<std::uint8_t> encode_density(const DensityMap& map);
DensityMap decode_density(const std::vector<std::uint8_t>& bytes, const std::string& origin = "<memory>");
void write_density(const std::filesystem::path& path, const DensityMap& map);
DensityMap read_density(const std::filesystem::path& path);

}  // namespace crowdnoise::labelcraft
