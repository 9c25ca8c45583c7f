#pragma once

#include "crowdnoise/engine/network.hpp"

#include <cstddef>
#include <cstdint>
#include <string>

namespace crowdnoise::engine {

struct GradientCheckOptions {
    double h = 1e-5;
    /// 0 checks every coordinate; otherwise a seeded sample of this many
    /// coordinates per parameter tensor (all of them if the tensor is smaller).
    std::size_t max_coords_per_tensor = 0;
    std::uint64_t seed = 0;
    /// Denominator floor of the relative error, for gradients near zero.
    double rel_floor = 1e-7;
};

struct GradientCheckReport {
    double max_rel_error = 0.0;
    std::size_t worst_tensor = 0;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    std::size_t checked = 0;
    /// Coordinates whose +-h perturbation crossed a ReLU kink or changed a
    /// pooling argmax; finite differences are not valid there.
    std::size_t skipped_nonsmooth = 0;

    std::string str() const;
};

/// Relative error |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor);

/// Compares backprop gradients of mse_loss(forward(input), target) with
/// central differences, parameter by parameter.
GradientCheckReport gradient_check(const NetworkState<double>& network, const Tensor4<double>& input,
                                   const Tensor4<double>& target, const GradientCheckOptions& options = {});

}  // namespace crowdnoise::engine
