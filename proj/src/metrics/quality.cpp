#include "crowdnoise/metrics/quality.hpp"

#include "crowdnoise/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace crowdnoise::metrics {

namespace {

constexpr double kTiny = 1e-12;

void check_dims(const DensityMap& a, const DensityMap& b, const char* who) {
    if (a.height != b.height || a.width != b.width) {
        throw InvalidArgument(std::string(who) + ": prediction " + std::to_string(a.height) + "x" +
                              std::to_string(a.width) + " vs ground truth " + std::to_string(b.height) + "x" +
                              std::to_string(b.width));
    }
}

bool all_zero(const DensityMap& m) {
    return std::all_of(m.values.begin(), m.values.end(), [](double v) { return v == 0.0; });
}

// Separable 'valid' filtering with the window taps.
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t h, std::size_t w,
                                 const std::vector<double>& taps) {
    const std::size_t k = taps.size();
    const std::size_t oh = h - k + 1, ow = w - k + 1;
    std::vector<double> tmp(h * ow, 0.0);
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < k; ++i) s += taps[i] * src[r * w + c + i];
            tmp[r * ow + c] = s;
        }
    std::vector<double> out(oh * ow, 0.0);
    for (std::size_t r = 0; r < oh; ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < k; ++i) s += taps[i] * tmp[(r + i) * ow + c];
            out[r * ow + c] = s;
        }
    return out;
}

}  // namespace

std::vector<double> ssim_taps() {
    std::vector<double> taps(kSsimWindow);
    const int half = kSsimWindow / 2;
    double total = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - half;
        taps[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        total += taps[i];
    }
    for (double& t : taps) t /= total;
    return taps;
}

DensityMap pad_to(const DensityMap& map, std::size_t height, std::size_t width) {
    const std::size_t h = std::max(height, map.height), w = std::max(width, map.width);
    if (h == map.height && w == map.width) return map;
    DensityMap out(h, w);
    for (std::size_t r = 0; r < map.height; ++r)
        for (std::size_t c = 0; c < map.width; ++c) out.at(r, c) = map.at(r, c);
    return out;
}

double ssim(const DensityMap& pred, const DensityMap& gt) {
    check_dims(pred, gt, "ssim");
    if (all_zero(pred) && all_zero(gt)) return 1.0;

    const DensityMap x = pad_to(pred, kSsimWindow, kSsimWindow);
    const DensityMap y = pad_to(gt, kSsimWindow, kSsimWindow);
    const std::size_t h = x.height, w = x.width;
    const double range = std::max({x.max(), y.max(), kTiny});
    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);

    std::vector<double> xx(h * w), yy(h * w), xy(h * w);
    for (std::size_t i = 0; i < h * w; ++i) {
        xx[i] = x.values[i] * x.values[i];
        yy[i] = y.values[i] * y.values[i];
        xy[i] = x.values[i] * y.values[i];
    }
    const auto taps = ssim_taps();
    const auto mu_x = filter_valid(x.values, h, w, taps);
    const auto mu_y = filter_valid(y.values, h, w, taps);
    const auto e_xx = filter_valid(xx, h, w, taps);
    const auto e_yy = filter_valid(yy, h, w, taps);
    const auto e_xy = filter_valid(xy, h, w, taps);

    double total = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
        const double mx = mu_x[i], my = mu_y[i];
        const double vx = e_xx[i] - mx * mx;
        const double vy = e_yy[i] - my * my;
        const double cov = e_xy[i] - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    return total / double(mu_x.size());
}

double psnr(const DensityMap& pred, const DensityMap& gt) {
    check_dims(pred, gt, "psnr");
    if (pred.values == gt.values) return std::numeric_limits<double>::infinity();
    const double gt_peak = gt.max();
    const double peak = gt_peak > 0.0 ? gt_peak : std::max(pred.max(), kTiny);
    const double scale = 255.0 / peak;
    double mse = 0.0;
    for (std::size_t i = 0; i < pred.values.size(); ++i) {
        const double d = (pred.values[i] - gt.values[i]) * scale;
        mse += d * d;
    }
    mse /= double(pred.values.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace crowdnoise::metrics
