#pragma once

#include "crowdnoise/metrics/counting.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace crowdnoise::metrics {

struct MetricsReport {
    std::string model;
    std::string regime;   // perfect | imperfect | missing
    std::string dataset;
    double mae = 0.0;
    double game = 0.0;
    std::size_t game_grid = 4;
    double ssim = 0.0;
    double psnr = 0.0;    // dB, may be +inf
    std::size_t n_images = 0;
};

/// Counts are map sums. Per-image GAME/SSIM/PSNR are averaged in index order.
MetricsReport evaluate(std::span<const DensityMap> preds, std::span<const DensityMap> gts,
                       const GameConfig& config = {});

/// Non-finite numbers are written as the strings "inf" / "-inf" / "nan".
nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& j);

/// Aligned text table: Model, Dataset, Labels, MAE, GAME, SSIM, PSNR.
std::string render_table(std::span<const MetricsReport> rows);

}  // namespace crowdnoise::metrics
