#pragma once

#include "crowdnoise/engine/network.hpp"
#include "crowdnoise/labelcraft/types.hpp"

namespace crowdnoise::modelzoo {

/// 1 x 1 x H x W tensor of the image intensities.
engine::Tensor4<float> image_tensor(const labelcraft::GrayImage& image);

/// Copies channel 0 of sample 0 into a density map; no clamping.
labelcraft::DensityMap to_density(const engine::Tensor4<float>& output);

/// One forward pass; negative outputs are clamped to zero. Image sides must
/// be divisible by the network's output stride.
labelcraft::DensityMap predict_density(const engine::NetworkState<float>& state, const labelcraft::GrayImage& image);
labelcraft::DensityMap predict_density(const engine::NetworkState<float>& state, const engine::Tensor4<float>& image);

}  // namespace crowdnoise::modelzoo
