#pragma once

#include "crowdnoise/labelcraft/scene.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace crowdnoise::labelcraft {

struct ManifestEntry {
    std::string id;
    std::filesystem::path image_path;
    std::filesystem::path annotation_path;
    std::filesystem::path density_path;    // full resolution; empty when the labels have none
    std::filesystem::path density_q_path;  // at the model output stride
    double count = 0.0;                    // dot count, or label mass for derived label sets
};

/// The on-disk index of a dataset or of a derived label set. The `regime`
/// tag says where density_q_path comes from: "perfect" density rendered from
/// the dots, "imperfect" annotator predictions, "missing" re-rendered after
/// dot deletion.
struct DatasetManifest {
    std::vector<ManifestEntry> images;
    std::string regime = "perfect";
    double sigma = 7.0;
    std::size_t stride = 4;
    std::optional<double> fraction;

    const ManifestEntry& find(const std::string& id) const;
};

/// Paths are written relative to the manifest's directory.
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Writes images/, annotations/, density/ (full), density_q/ (1/stride) and
/// manifest.json under out_dir.
DatasetManifest generate_dataset(const SceneConfig& config, std::size_t n_images, const std::filesystem::path& out_dir,
                                 double sigma = 7.0, std::size_t stride = 4);

}  // namespace crowdnoise::labelcraft
