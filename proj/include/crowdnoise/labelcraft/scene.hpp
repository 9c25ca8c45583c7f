#pragma once

#include "crowdnoise/labelcraft/types.hpp"

#include <cstddef>
#include <cstdint>
#include <string>

namespace crowdnoise::labelcraft {

/// Parameters of the synthetic crowd scenes: bright round "heads" over a
/// smoothly varying noisy background.
struct SceneConfig {
    std::size_t height = 48;
    std::size_t width = 48;
    std::size_t count_min = 5;
    std::size_t count_max = 25;
    double radius_min = 1.5;
    double radius_max = 2.5;
    double noise = 0.05;  // amplitude of per-pixel uniform background noise
    std::uint64_t seed = 1;
};

struct Scene {
    GrayImage image;
    DotAnnotation dots;
};

void validate(const SceneConfig& config);

/// "img_0007" style identifier for the index-th scene.
std::string scene_id(std::uint64_t index);

/// Pure function of (config, index).
Scene generate_scene(const SceneConfig& config, std::uint64_t index);

}  // namespace crowdnoise::labelcraft
