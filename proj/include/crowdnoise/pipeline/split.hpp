#pragma once

#include "crowdnoise/labelcraft/dataset.hpp"

#include <cstdint>

namespace crowdnoise::pipeline {

struct DatasetSplit {
    labelcraft::DatasetManifest train;
    labelcraft::DatasetManifest val;
};

/// Seeded permutation, then the first floor(train_fraction * n) images go to
/// training and the rest to validation.
DatasetSplit split_dataset(const labelcraft::DatasetManifest& manifest, double train_fraction, std::uint64_t seed);

}  // namespace crowdnoise::pipeline
