#pragma once

#include "crowdnoise/engine/network.hpp"

#include <cstddef>
#include <cstdint>
#include <string>

namespace crowdnoise::modelzoo {

using engine::NetworkSpec;
using engine::NetworkState;

/// ceil(channels * multiplier), at least 1. Multiplier must lie in (0, 1].
std::size_t scale_channels(std::size_t channels, double multiplier);

/// Annotator network: VGG-16 conv layers 1-7 (pools after conv 2 and 4), a
/// back-end of six dilation-2 3x3 convs (256, 256, 256, 128, 64, 64) and a
/// 1x1 output conv. Output stride 4.
NetworkSpec csrnet_lite_spec(double width_multiplier = 1.0, std::size_t in_channels = 3);

/// Three columns with kernel ladders (9,7,7,7), (7,5,5,5), (5,3,3,3), 2x2
/// pools after the first two convs, fused by concatenation and a 1x1 conv.
/// Output stride 4.
NetworkSpec mcnn_spec(double width_multiplier = 1.0, std::size_t in_channels = 3);

/// "csrnet_lite" or "mcnn".
NetworkSpec spec_by_name(const std::string& model, double width_multiplier, std::size_t in_channels);

template <typename T = float>
NetworkState<T> build_csrnet_lite(double width_multiplier, std::size_t in_channels, std::uint64_t seed = 0) {
    return engine::init_network<T>(csrnet_lite_spec(width_multiplier, in_channels), seed);
}

template <typename T = float>
NetworkState<T> build_mcnn(double width_multiplier, std::size_t in_channels, std::uint64_t seed = 0) {
    return engine::init_network<T>(mcnn_spec(width_multiplier, in_channels), seed);
}

/// Human-readable layer table with output shapes for an input of the given
/// size, per-layer and total parameter counts.
std::string describe(const NetworkSpec& spec, std::size_t height, std::size_t width);

}  // namespace crowdnoise::modelzoo
