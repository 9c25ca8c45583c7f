#pragma once

#include "crowdnoise/labelcraft/types.hpp"

#include <cstddef>
#include <span>

namespace crowdnoise::metrics {

using labelcraft::DensityMap;

/// Mean absolute count error.
double mae(std::span<const double> pred_counts, std::span<const double> gt_counts);

/// g x g patches per map. Maps whose sides are not multiples of g are
/// zero-padded on the bottom/right first.
struct GameConfig {
    std::size_t grid = 4;
};

/// Sum over patches of |patch mass(pred) - patch mass(gt)| for one image.
double game(const DensityMap& pred, const DensityMap& gt, const GameConfig& config = {});

}  // namespace crowdnoise::metrics
