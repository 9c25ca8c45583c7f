#include "crowdnoise/labelcraft/scene.hpp"

#include "crowdnoise/errors.hpp"
#include "crowdnoise/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace crowdnoise::labelcraft {

void validate(const SceneConfig& config) {
    if (config.height == 0 || config.width == 0) throw InvalidArgument("scene: image size must be positive");
    if (config.count_min > config.count_max) throw InvalidArgument("scene: count_min > count_max");
    if (!(config.radius_min > 0.0) || config.radius_min > config.radius_max) {
        throw InvalidArgument("scene: need 0 < radius_min <= radius_max");
    }
    if (!(config.noise >= 0.0)) throw InvalidArgument("scene: noise amplitude must be >= 0");
    const double blob_area = std::numbers::pi * config.radius_max * config.radius_max;
    const double image_area = double(config.height) * double(config.width);
    if (double(config.count_max) * blob_area > image_area) {
        throw InvalidArgument("scene: " + std::to_string(config.count_max) + " blobs of radius " +
                              std::to_string(config.radius_max) + " exceed the image area");
    }
    if (2.0 * config.radius_max >= double(std::min(config.height, config.width)) - 1.0) {
        throw InvalidArgument("scene: blob radius too large for the image");
    }
}

std::string scene_id(std::uint64_t index) {
    std::string digits = std::to_string(index);
    if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
    return "img_" + digits;
}

Scene generate_scene(const SceneConfig& config, std::uint64_t index) {
    validate(config);
    Rng rng(derive_seed(config.seed, "scene", index));

    Scene scene;
    scene.dots.image_id = scene_id(index);
    const auto n = static_cast<std::size_t>(
        rng.integer(static_cast<std::int64_t>(config.count_min), static_cast<std::int64_t>(config.count_max)));

    const std::size_t h = config.height, w = config.width;
    GrayImage& img = scene.image;
    img = GrayImage(h, w);

    // Background: base level plus a slow planar/sinusoidal shading.
    const double base = rng.uniform(0.10, 0.25);
    const double tilt_x = rng.uniform(-0.08, 0.08), tilt_y = rng.uniform(-0.08, 0.08);
    const double wave = rng.uniform(0.0, 0.05), phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const double u = double(c) / double(w), v = double(r) / double(h);
            double val = base + tilt_x * (u - 0.5) + tilt_y * (v - 0.5) +
                         wave * std::sin(2.0 * std::numbers::pi * (u + v) + phase);
            val += config.noise * rng.uniform(-1.0, 1.0);
            img.at(r, c) = static_cast<float>(val);
        }
    }

    scene.dots.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double radius = rng.uniform(config.radius_min, config.radius_max);
        const double x = rng.uniform(radius, double(w) - 1.0 - radius);
        const double y = rng.uniform(radius, double(h) - 1.0 - radius);
        const double peak = rng.uniform(0.55, 0.85);
        scene.dots.points.push_back({x, y});

        const double s = radius / 1.5;
        const int reach = static_cast<int>(std::ceil(radius * 2.0));
        const int cx = static_cast<int>(std::lround(x)), cy = static_cast<int>(std::lround(y));
        for (int yy = std::max(0, cy - reach); yy <= std::min<int>(int(h) - 1, cy + reach); ++yy) {
            for (int xx = std::max(0, cx - reach); xx <= std::min<int>(int(w) - 1, cx + reach); ++xx) {
                const double d2 = (xx - x) * (xx - x) + (yy - y) * (yy - y);
                img.at(yy, xx) += static_cast<float>(peak * std::exp(-d2 / (2.0 * s * s)));
            }
        }
    }
    for (float& v : img.values) v = std::clamp(v, 0.0f, 1.0f);
    return scene;
}

}  // namespace crowdnoise::labelcraft
