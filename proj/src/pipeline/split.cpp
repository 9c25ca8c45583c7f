#include "crowdnoise/pipeline/split.hpp"

#include "crowdnoise/errors.hpp"
#include "crowdnoise/random.hpp"

#include <cmath>
#include <numeric>

namespace crowdnoise::pipeline {

DatasetSplit split_dataset(const labelcraft::DatasetManifest& manifest, double train_fraction, std::uint64_t seed) {
    const std::size_t n = manifest.images.size();
    if (n < 2) throw InvalidArgument("split_dataset: need at least 2 images, got " + std::to_string(n));
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw InvalidArgument("split_dataset: train fraction must be in (0, 1)");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * double(n) + 1e-9));
    DatasetSplit split;
    split.train = manifest;
    split.val = manifest;
    split.train.images.clear();
    split.val.images.clear();
    for (std::size_t i = 0; i < n; ++i) {
        (i < n_train ? split.train : split.val).images.push_back(manifest.images[order[i]]);
    }
    return split;
}

}  // namespace crowdnoise::pipeline
