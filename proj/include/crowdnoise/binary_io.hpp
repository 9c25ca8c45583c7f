#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crowdnoise::io {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: truncate + write + check.
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);

/// Little-endian byte sink.
class ByteWriter {
public:
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    void bytes(std::span<const std::uint8_t> b);
    void text(std::string_view s);
    const std::vector<std::uint8_t>& data() const { return buf_; }

private:
    std::vector<std::uint8_t> buf_;
};

/// Little-endian byte source over a borrowed buffer. Throws IoError(path) on
/// truncation so callers get the offending file in the message.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> data, std::string path) : data_(data), path_(std::move(path)) {}
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    std::string text(std::size_t n);
    std::span<const std::uint8_t> bytes(std::size_t n);
    std::size_t remaining() const { return data_.size() - pos_; }
    const std::string& path() const { return path_; }

private:
    void need(std::size_t n) const;
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    std::string path_;
};

}  // namespace crowdnoise::io
