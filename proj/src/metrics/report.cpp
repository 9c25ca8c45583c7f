#include "crowdnoise/metrics/report.hpp"

#include "crowdnoise/errors.hpp"
#include "crowdnoise/metrics/quality.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace crowdnoise::metrics {

MetricsReport evaluate(std::span<const DensityMap> preds, std::span<const DensityMap> gts, const GameConfig& config) {
    if (preds.size() != gts.size()) {
        throw InvalidArgument("evaluate: " + std::to_string(preds.size()) + " predictions vs " +
                              std::to_string(gts.size()) + " ground truths");
    }
    if (preds.empty()) throw InvalidArgument("evaluate: no images");

    std::vector<double> pc, gc;
    double game_sum = 0.0, ssim_sum = 0.0, psnr_sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        pc.push_back(preds[i].sum());
        gc.push_back(gts[i].sum());
        game_sum += game(preds[i], gts[i], config);
        ssim_sum += ssim(preds[i], gts[i]);
        psnr_sum += psnr(preds[i], gts[i]);
    }
    MetricsReport r;
    const double n = double(preds.size());
    r.mae = mae(pc, gc);
    r.game = game_sum / n;
    r.game_grid = config.grid;
    r.ssim = ssim_sum / n;
    r.psnr = psnr_sum / n;
    r.n_images = preds.size();
    return r;
}

namespace {

nlohmann::json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double parse_number(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        throw InvalidArgument("not a number: " + s);
    }
    return j.get<double>();
}

std::string fixed2(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

nlohmann::json to_json(const MetricsReport& r) {
    return {{"model", r.model},       {"labels", r.regime},        {"dataset", r.dataset},
            {"mae", number(r.mae)},   {"game", number(r.game)},    {"game_grid", r.game_grid},
            {"ssim", number(r.ssim)}, {"psnr", number(r.psnr)},    {"n_images", r.n_images}};
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
    MetricsReport r;
    r.model = j.at("model").get<std::string>();
    r.regime = j.at("labels").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.mae = parse_number(j.at("mae"));
    r.game = parse_number(j.at("game"));
    r.game_grid = j.at("game_grid").get<std::size_t>();
    r.ssim = parse_number(j.at("ssim"));
    r.psnr = parse_number(j.at("psnr"));
    r.n_images = j.at("n_images").get<std::size_t>();
    return r;
}

std::string render_table(std::span<const MetricsReport> rows) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"Model", "Dataset", "Labels", "MAE", "GAME", "SSIM", "PSNR"});
    for (const auto& r : rows) {
        cells.push_back({r.model, r.dataset, r.regime, fixed2(r.mae), fixed2(r.game), fixed2(r.ssim), fixed2(r.psnr)});
    }
    std::vector<std::size_t> width(7, 0);
    for (const auto& row : cells)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());

    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            const std::size_t pad = width[i] - row[i].size();
            if (i < 3) {
                out << row[i] << std::string(pad, ' ');  // text columns left-aligned
            } else {
                out << std::string(pad, ' ') << row[i];
            }
            out << (i + 1 < row.size() ? "  " : "\n");
        }
    };
    line(cells.front());
    std::size_t total = 0;
    for (std::size_t w : width) total += w + 2;
    out << std::string(total - 2, '-') << "\n";
    for (std::size_t i = 1; i < cells.size(); ++i) line(cells[i]);
    return out.str();
}

}  // namespace crowdnoise::metrics
