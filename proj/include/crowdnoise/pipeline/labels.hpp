#pragma once

#include "crowdnoise/engine/network.hpp"
#include "crowdnoise/labelcraft/dataset.hpp"

#include <cstdint>
#include <filesystem>

namespace crowdnoise::pipeline {

using labelcraft::DatasetManifest;

// Each function writes one DMAP label per image plus out_dir/manifest.json
// and returns that manifest. Label manifests keep the image and annotation
// paths of the source and point density_q_path at the new labels; `count`
// is the label mass.

/// Re-renders the dots at `sigma` and sum-pools to the source stride.
DatasetManifest make_perfect_labels(const DatasetManifest& manifest, double sigma,
                                    const std::filesystem::path& out_dir);

/// Per image: drop floor(fraction * N) dots (seed keyed by image id), render,
/// sum-pool to the stride.
DatasetManifest make_missing_labels(const DatasetManifest& manifest, double fraction, std::uint64_t seed,
                                    double sigma, const std::filesystem::path& out_dir);

/// Clamped annotator predictions at the annotator's output stride. No
/// full-resolution label is written.
DatasetManifest annotate(const engine::NetworkState<float>& annotator, const DatasetManifest& manifest,
                         const std::filesystem::path& out_dir);

}  // namespace crowdnoise::pipeline
