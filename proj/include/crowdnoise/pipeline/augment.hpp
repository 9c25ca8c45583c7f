#pragma once

#include "crowdnoise/labelcraft/types.hpp"

#include <cstddef>
#include <cstdint>

namespace crowdnoise::pipeline {

using labelcraft::DensityMap;
using labelcraft::DotAnnotation;
using labelcraft::GrayImage;

struct AugmentOptions {
    bool brightness = true;
    bool contrast = true;
    bool flip = true;
};

inline constexpr double kBrightnessRange = 0.2;   // delta in [-0.2, 0.2]
inline constexpr double kContrastLow = 0.8;       // gamma in [0.8, 1.2]
inline constexpr double kContrastHigh = 1.2;

/// What one augmentation draw decided. Each transform fires with probability 1/2.
struct AugmentDecision {
    bool brightness = false;
    double delta = 0.0;
    bool contrast = false;
    double gamma = 1.0;
    bool flip = false;
};

AugmentDecision draw_augmentation(std::uint64_t seed, const AugmentOptions& options);

struct Augmented {
    GrayImage image;
    DensityMap density;
    DotAnnotation dots;
};

/// Photometric changes touch only the image (clamped to [0, 1]). A flip
/// mirrors image, density (at any resolution) and dots (x -> W - 1 - x).
Augmented apply_augmentation(const AugmentDecision& decision, const GrayImage& image, const DensityMap& density,
                             const DotAnnotation& dots);

Augmented augment(const GrayImage& image, const DensityMap& density, const DotAnnotation& dots, std::uint64_t seed,
                  const AugmentOptions& options = {});

struct AlignedPair {
    GrayImage image;
    DensityMap density;
};

/// Zero-pads image and its full-resolution density on the bottom/right up to
/// the next multiples of the stride.
AlignedPair pad_or_crop(const GrayImage& image, const DensityMap& density, std::size_t stride = 4);

}  // namespace crowdnoise::pipeline
