#include "crowdnoise/pipeline/augment.hpp"

#include "crowdnoise/random.hpp"

#include <algorithm>
#include <cmath>

namespace crowdnoise::pipeline {

AugmentDecision draw_augmentation(std::uint64_t seed, const AugmentOptions& options) {
    // Every value is drawn regardless of the toggles so that switching one
    // transform off does not shift the others.
    Rng rng(seed);
    AugmentDecision d;
    const bool b = rng.coin();
    const double delta = rng.uniform(-kBrightnessRange, kBrightnessRange);
    const bool c = rng.coin();
    const double gamma = rng.uniform(kContrastLow, kContrastHigh);
    const bool f = rng.coin();
    d.brightness = options.brightness && b;
    d.delta = d.brightness ? delta : 0.0;
    d.contrast = options.contrast && c;
    d.gamma = d.contrast ? gamma : 1.0;
    d.flip = options.flip && f;
    return d;
}

Augmented apply_augmentation(const AugmentDecision& decision, const GrayImage& image, const DensityMap& density,
                             const DotAnnotation& dots) {
    Augmented out{image, density, dots};
    auto& px = out.image.values;
    if (decision.brightness) {
        for (float& v : px) v = std::clamp(static_cast<float>(v + decision.delta), 0.0f, 1.0f);
    }
    if (decision.contrast && !px.empty()) {
        double mean = 0.0;
        for (float v : px) mean += v;
        mean /= double(px.size());
        for (float& v : px) v = std::clamp(static_cast<float>((v - mean) * decision.gamma + mean), 0.0f, 1.0f);
    }
    if (decision.flip) {
        for (std::size_t r = 0; r < out.image.height; ++r) {
            float* row = &out.image.values[r * out.image.width];
            std::reverse(row, row + out.image.width);
        }
        for (std::size_t r = 0; r < out.density.height; ++r) {
            double* row = &out.density.values[r * out.density.width];
            std::reverse(row, row + out.density.width);
        }
        const double w = double(out.image.width);
        for (auto& p : out.dots.points) {
            // Dots in (W-1, W) would land below zero; pin them to the edge pixel.
            p.x = std::clamp(w - 1.0 - p.x, 0.0, std::nextafter(w, 0.0));
        }
    }
    return out;
}

Augmented augment(const GrayImage& image, const DensityMap& density, const DotAnnotation& dots, std::uint64_t seed,
                  const AugmentOptions& options) {
    return apply_augmentation(draw_augmentation(seed, options), image, density, dots);
}

AlignedPair pad_or_crop(const GrayImage& image, const DensityMap& density, std::size_t stride) {
    auto up = [stride](std::size_t v) { return (v + stride - 1) / stride * stride; };
    AlignedPair out;
    out.image = GrayImage(up(image.height), up(image.width));
    for (std::size_t r = 0; r < image.height; ++r)
        for (std::size_t c = 0; c < image.width; ++c) out.image.at(r, c) = image.at(r, c);
    out.density = DensityMap(up(density.height), up(density.width));
    for (std::size_t r = 0; r < density.height; ++r)
        for (std::size_t c = 0; c < density.width; ++c) out.density.at(r, c) = density.at(r, c);
    return out;
}

}  // namespace crowdnoise::pipeline
