#include "crowdnoise/metrics/counting.hpp"

#include "crowdnoise/errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace crowdnoise::metrics {

double mae(std::span<const double> pred_counts, std::span<const double> gt_counts) {
    if (pred_counts.size() != gt_counts.size()) {
        throw InvalidArgument("mae: " + std::to_string(pred_counts.size()) + " predictions vs " +
                              std::to_string(gt_counts.size()) + " ground truths");
    }
    if (pred_counts.empty()) throw InvalidArgument("mae: empty dataset");
    double total = 0.0;
    for (std::size_t i = 0; i < pred_counts.size(); ++i) total += std::abs(pred_counts[i] - gt_counts[i]);
    return total / double(pred_counts.size());
}

double game(const DensityMap& pred, const DensityMap& gt, const GameConfig& config) {
    if (pred.height != gt.height || pred.width != gt.width) {
        throw InvalidArgument("game: prediction " + std::to_string(pred.height) + "x" + std::to_string(pred.width) +
                              " vs ground truth " + std::to_string(gt.height) + "x" + std::to_string(gt.width));
    }
    const std::size_t g = config.grid;
    if (g == 0) throw InvalidArgument("game: grid must be >= 1");
    const std::size_t ph = (pred.height + g - 1) / g;  // patch extent after padding
    const std::size_t pw = (pred.width + g - 1) / g;

    // Patch masses are accumulated in row-major order like DensityMap::sum, so
    // g = 1 reproduces the absolute count error bit for bit.
    std::vector<double> mass_pred(g * g, 0.0), mass_gt(g * g, 0.0);
    for (std::size_t r = 0; r < pred.height; ++r) {
        for (std::size_t c = 0; c < pred.width; ++c) {
            const std::size_t patch = (r / ph) * g + c / pw;
            mass_pred[patch] += pred.at(r, c);
            mass_gt[patch] += gt.at(r, c);
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < g * g; ++i) total += std::abs(mass_pred[i] - mass_gt[i]);
    return total;
}

}  // namespace crowdnoise::metrics
