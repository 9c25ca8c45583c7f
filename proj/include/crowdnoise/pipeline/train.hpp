#pragma once

#include "crowdnoise/engine/adam.hpp"
#include "crowdnoise/engine/network.hpp"
#include "crowdnoise/labelcraft/dataset.hpp"
#include "crowdnoise/pipeline/augment.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace crowdnoise::pipeline {

/// An image with the density map it is trained or validated against, at the
/// network output stride.
struct LabelledImage {
    std::string id;
    GrayImage image;
    DensityMap label;
};

/// Images come from `images`; labels are taken, by image id, from the
/// density_q_path entries of `labels`. Every file read is appended to
/// `accessed` when given.
std::vector<LabelledImage> load_labelled(const labelcraft::DatasetManifest& images,
                                         const labelcraft::DatasetManifest& labels,
                                         std::vector<std::filesystem::path>* accessed = nullptr);

struct TrainConfig {
    double lr = 1e-4;
    std::size_t batch_size = 8;
    std::size_t max_epochs = 100;
    std::size_t patience = 20;  // epochs without validation-MAE improvement
    std::uint64_t seed = 0;
    AugmentOptions augment;
    std::size_t threads = 1;    // does not change results

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_mae = 0.0;
};

struct TrainResult {
    engine::NetworkState<float> state;  // best validation-MAE checkpoint
    std::vector<EpochRecord> curve;
    std::size_t best_epoch = 0;         // 0 when no epoch ran
    double best_val_mae = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mean absolute count error of clamped predictions against the labels of `val`.
double validation_mae(const engine::NetworkState<float>& state, const std::vector<LabelledImage>& val);

/// Minimizes the batch-mean squared L2 map distance with Adam over shuffled,
/// augmented mini-batches. `val` must carry perfect labels; the returned state
/// is the epoch with the lowest validation MAE (earliest on ties).
TrainResult train(engine::NetworkState<float> model, const std::vector<LabelledImage>& train_set,
                  const std::vector<LabelledImage>& val, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Runs `steps` Adam updates on one fixed batch without augmentation and
/// returns the loss before each step followed by the final loss.
std::vector<double> overfit_batch(engine::NetworkState<float>& model, const std::vector<LabelledImage>& batch,
                                  double lr, std::size_t steps);

/// "epoch,train_loss,val_mae" CSV.
std::string curve_csv(const std::vector<EpochRecord>& curve);

}  // namespace crowdnoise::pipeline
