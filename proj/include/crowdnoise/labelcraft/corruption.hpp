#pragma once

#include "crowdnoise/labelcraft/types.hpp"

#include <cstdint>
#include <string>

namespace crowdnoise::labelcraft {

enum class CorruptionKind { none, missing, annotator };

struct CorruptionSpec {
    CorruptionKind kind = CorruptionKind::none;
    double fraction = 0.3;  // only meaningful for `missing`
    std::uint64_t seed = 0;
};

std::string to_string(CorruptionKind kind);
CorruptionKind corruption_kind_from_string(const std::string& name);

/// Number of points drop_annotations removes: floor(fraction * n).
std::size_t dropped_count(std::size_t n, double fraction);

/// Deletes floor(fraction * N) points chosen uniformly without replacement.
/// Survivors keep their relative order.
DotAnnotation drop_annotations(const DotAnnotation& dots, double fraction, std::uint64_t seed);

}  // namespace crowdnoise::labelcraft
