#pragma once

#include "crowdnoise/engine/network.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace crowdnoise::engine {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// "NNCK" | u32 version | u64 spec length | spec JSON | per parameter tensor in
// declaration order: u32 rank, u32 dims..., binary32 values. Little-endian.
// Weights are written with rank 4, biases with rank 1.
std::vector<std::uint8_t> encode_checkpoint(const NetworkState<float>& state);
NetworkState<float> decode_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& origin = "<memory>");

void save_checkpoint(const std::filesystem::path& path, const NetworkState<float>& state);
NetworkState<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace crowdnoise::engine
