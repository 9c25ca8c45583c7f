#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace crowdnoise::engine {

struct AdamHyper {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <typename T>
struct AdamState {
    AdamHyper hyper;
    std::int64_t t = 0;
    std::vector<std::vector<T>> m;  // one buffer per parameter tensor
    std::vector<std::vector<T>> v;
};

/// One bias-corrected Adam update of every parameter tensor in place.
/// Throws TrainingDiverged (step = the would-be t) if any gradient is
/// non-finite; nothing is modified in that case.
template <typename T>
void adam_step(std::span<const std::span<T>> params, std::span<const std::span<const T>> grads,
               AdamState<T>& state);

}  // namespace crowdnoise::engine
