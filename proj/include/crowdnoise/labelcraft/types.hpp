#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace crowdnoise::labelcraft {

/// Sub-pixel head position. Pixel (r, c) is centred on coordinate (c, r).
struct Point2D {
    double x = 0.0;  // column
    double y = 0.0;  // row

    friend bool operator==(const Point2D&, const Point2D&) = default;
};

struct DotAnnotation {
    std::string image_id;
    std::vector<Point2D> points;

    std::size_t count() const { return points.size(); }
};

/// Non-negative persons-per-pixel grid, row-major.
struct DensityMap {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> values;

    DensityMap() = default;
    DensityMap(std::size_t h, std::size_t w) : height(h), width(w), values(h * w, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return values[r * width + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * width + c]; }
    double sum() const;
    double max() const;
    bool empty() const { return values.empty(); }
};

/// Single-channel intensity image with values in [0, 1], row-major.
struct GrayImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> values;

    GrayImage() = default;
    GrayImage(std::size_t h, std::size_t w) : height(h), width(w), values(h * w, 0.0f) {}

    float& at(std::size_t r, std::size_t c) { return values[r * width + c]; }
    float at(std::size_t r, std::size_t c) const { return values[r * width + c]; }
};

}  // namespace crowdnoise::labelcraft
