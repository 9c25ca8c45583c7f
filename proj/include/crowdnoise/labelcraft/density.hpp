#pragma once

#include "crowdnoise/labelcraft/types.hpp"

#include <cstddef>
#include <vector>

namespace crowdnoise::labelcraft {

inline constexpr double kDefaultSigma = 7.0;

/// Square kernel of side 2*radius+1, row-major, summing to 1.
struct GaussianKernel {
    int radius = 0;
    std::vector<double> values;

    int side() const { return 2 * radius + 1; }
    double at(int dy, int dx) const { return values[(dy + radius) * side() + (dx + radius)]; }
};

GaussianKernel gaussian_kernel(double sigma, int radius);

/// ceil(3 sigma), the truncation radius used by render_density.
int default_radius(double sigma);

/// Renders dots as unit-mass Gaussians. Each dot's kernel is centred on its
/// nearest pixel and the part falling inside the image is rescaled to sum to
/// one, so the map sums to the dot count even for dots near the border.
DensityMap render_density(const DotAnnotation& dots, std::size_t height, std::size_t width,
                          double sigma = kDefaultSigma);

/// Block-sum pooling by an integer factor. Mass is preserved.
DensityMap downsample_sum(const DensityMap& map, std::size_t factor);

}  // namespace crowdnoise::labelcraft
