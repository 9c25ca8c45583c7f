#include "crowdnoise/engine/adam.hpp"

#include "crowdnoise/errors.hpp"

#include <cmath>
#include <string>

namespace crowdnoise::engine {

template <typename T>
void adam_step(std::span<const std::span<T>> params, std::span<const std::span<const T>> grads,
               AdamState<T>& state) {
    if (params.size() != grads.size()) throw InvalidArgument("adam_step: params/grads count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].size() != grads[i].size()) {
            throw InvalidArgument("adam_step: tensor " + std::to_string(i) + " has " +
                                  std::to_string(params[i].size()) + " params but " +
                                  std::to_string(grads[i].size()) + " grads");
        }
        for (T g : grads[i]) {
            if (!std::isfinite(g)) throw TrainingDiverged(-1, state.t + 1, "non-finite gradient");
        }
    }
    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.m[i].assign(params[i].size(), T(0));
            state.v[i].assign(params[i].size(), T(0));
        }
    } else if (state.m.size() != params.size()) {
        throw ContractViolation("adam_step: optimizer state built for a different parameter list");
    }

    ++state.t;
    const AdamHyper& h = state.hyper;
    const double c1 = 1.0 - std::pow(h.beta1, double(state.t));
    const double c2 = 1.0 - std::pow(h.beta2, double(state.t));
    const T b1 = static_cast<T>(h.beta1), b2 = static_cast<T>(h.beta2);
    const T one = T(1);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& m = state.m[i];
        auto& v = state.v[i];
        const auto p = params[i];
        const auto g = grads[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = b1 * m[j] + (one - b1) * g[j];
            v[j] = b2 * v[j] + (one - b2) * g[j] * g[j];
            const double m_hat = double(m[j]) / c1;
            const double v_hat = double(v[j]) / c2;
            p[j] = static_cast<T>(double(p[j]) - h.lr * m_hat / (std::sqrt(v_hat) + h.eps));
        }
    }
}

template void adam_step(std::span<const std::span<float>>, std::span<const std::span<const float>>,
                        AdamState<float>&);
template void adam_step(std::span<const std::span<double>>, std::span<const std::span<const double>>,
                        AdamState<double>&);

}  // namespace crowdnoise::engine
