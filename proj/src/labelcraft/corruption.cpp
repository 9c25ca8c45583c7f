#include "crowdnoise/labelcraft/corruption.hpp"

#include "crowdnoise/errors.hpp"
#include "crowdnoise/random.hpp"

#include <cmath>
#include <numeric>

namespace crowdnoise::labelcraft {

std::string to_string(CorruptionKind kind) {
    switch (kind) {
        case CorruptionKind::none: return "none";
        case CorruptionKind::missing: return "missing";
        case CorruptionKind::annotator: return "annotator";
    }
    return "none";
}

CorruptionKind corruption_kind_from_string(const std::string& name) {
    if (name == "none") return CorruptionKind::none;
    if (name == "missing") return CorruptionKind::missing;
    if (name == "annotator") return CorruptionKind::annotator;
    throw InvalidArgument("unknown corruption kind '" + name + "'");
}

std::size_t dropped_count(std::size_t n, double fraction) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
        throw InvalidArgument("drop fraction must be in [0, 1], got " + std::to_string(fraction));
    }
    // 1e-9 absorbs products like 0.57 * 100 = 56.999999999999993.
    const auto k = static_cast<std::size_t>(std::floor(fraction * double(n) + 1e-9));
    return std::min(k, n);
}

DotAnnotation drop_annotations(const DotAnnotation& dots, double fraction, std::uint64_t seed) {
    const std::size_t n = dots.points.size();
    const std::size_t k = dropped_count(n, fraction);

    DotAnnotation out;
    out.image_id = dots.image_id;
    if (k == 0) {
        out.points = dots.points;
        return out;
    }

    // Partial Fisher-Yates: the first k slots end up as the dropped set.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(order[i], order[j]);
    }
    std::vector<bool> drop(n, false);
    for (std::size_t i = 0; i < k; ++i) drop[order[i]] = true;

    out.points.reserve(n - k);
    for (std::size_t i = 0; i < n; ++i)
        if (!drop[i]) out.points.push_back(dots.points[i]);
    return out;
}

}  // namespace crowdnoise::labelcraft
