#include "crowdnoise/labelcraft/density.hpp"

#include "crowdnoise/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace crowdnoise::labelcraft {

double DensityMap::sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

double DensityMap::max() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

GaussianKernel gaussian_kernel(double sigma, int radius) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidArgument("gaussian_kernel: sigma must be positive, got " + std::to_string(sigma));
    }
    if (radius < 0) throw InvalidArgument("gaussian_kernel: radius must be >= 0");

    GaussianKernel k;
    k.radius = radius;
    const int side = k.side();
    k.values.resize(static_cast<std::size_t>(side) * side);
    const double denom = 2.0 * sigma * sigma;
    double total = 0.0;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            const double v = std::exp(-(dx * dx + dy * dy) / denom);
            k.values[(dy + radius) * side + (dx + radius)] = v;
            total += v;
        }
    }
    for (double& v : k.values) v /= total;
    return k;
}

int default_radius(double sigma) { return static_cast<int>(std::ceil(3.0 * sigma)); }

DensityMap render_density(const DotAnnotation& dots, std::size_t height, std::size_t width, double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("render_density: sigma must be positive");
    DensityMap map(height, width);
    if (dots.points.empty()) return map;

    for (std::size_t i = 0; i < dots.points.size(); ++i) {
        const auto& p = dots.points[i];
        if (!(p.x >= 0.0 && p.x < double(width) && p.y >= 0.0 && p.y < double(height))) {
            std::ostringstream msg;
            msg << "render_density: point #" << i << " (" << p.x << ", " << p.y << ") of '" << dots.image_id
                << "' outside " << height << "x" << width << " image";
            throw InvalidArgument(msg.str());
        }
    }

    const GaussianKernel kernel = gaussian_kernel(sigma, default_radius(sigma));
    const int r = kernel.radius;
    const int h = static_cast<int>(height);
    const int w = static_cast<int>(width);
    for (const auto& p : dots.points) {
        const int cx = std::min(w - 1, static_cast<int>(std::lround(p.x)));
        const int cy = std::min(h - 1, static_cast<int>(std::lround(p.y)));
        const int y0 = std::max(0, cy - r), y1 = std::min(h - 1, cy + r);
        const int x0 = std::max(0, cx - r), x1 = std::min(w - 1, cx + r);

        double inside = 0.0;
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) inside += kernel.at(y - cy, x - cx);

        const double scale = 1.0 / inside;
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) map.at(y, x) += kernel.at(y - cy, x - cx) * scale;
    }
    return map;
}

DensityMap downsample_sum(const DensityMap& map, std::size_t factor) {
    if (factor == 0) throw InvalidArgument("downsample_sum: factor must be >= 1");
    if (map.height % factor != 0 || map.width % factor != 0) {
        throw InvalidArgument("downsample_sum: " + std::to_string(map.height) + "x" + std::to_string(map.width) +
                              " not divisible by " + std::to_string(factor));
    }
    DensityMap out(map.height / factor, map.width / factor);
    for (std::size_t r = 0; r < out.height; ++r) {
        for (std::size_t c = 0; c < out.width; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < factor; ++i)
                for (std::size_t j = 0; j < factor; ++j) s += map.at(r * factor + i, c * factor + j);
            out.at(r, c) = s;
        }
    }
    return out;
}

}  // namespace crowdnoise::labelcraft
