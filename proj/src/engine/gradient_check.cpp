#include "crowdnoise/engine/gradient_check.hpp"

#include "crowdnoise/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace crowdnoise::engine {

std::string GradientCheckReport::str() const {
    std::ostringstream out;
    out << "max_rel_error=" << max_rel_error << " at tensor " << worst_tensor << "[" << worst_index
        << "] (analytic " << worst_analytic << ", numeric " << worst_numeric << "), checked " << checked
        << ", skipped " << skipped_nonsmooth;
    return out.str();
}

double relative_error(double analytic, double numeric, double floor) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / scale;
}

namespace {

struct Evaluation {
    double loss;
    std::uint64_t signature;
};

Evaluation evaluate(const NetworkState<double>& net, const Tensor4<double>& input, const Tensor4<double>& target) {
    ForwardTrace<double> trace;
    const Tensor4<double> out = forward(net, input, &trace);
    return {mse_loss(out, target).value, activation_signature(trace)};
}

}  // namespace

GradientCheckReport gradient_check(const NetworkState<double>& network, const Tensor4<double>& input,
                                   const Tensor4<double>& target, const GradientCheckOptions& options) {
    ForwardTrace<double> trace;
    const Tensor4<double> out = forward(network, input, &trace);
    const std::uint64_t base_signature = activation_signature(trace);
    const Loss<double> loss = mse_loss(out, target);
    ParamList<double> grads = zeros_like(network.params);
    backward(network, trace, loss.grad, grads);

    GradientCheckReport report;
    NetworkState<double> probe = network;
    Rng rng(options.seed);
    for (std::size_t t = 0; t < probe.params.size(); ++t) {
        const std::size_t n = probe.params[t].size();
        std::vector<std::size_t> coords(n);
        std::iota(coords.begin(), coords.end(), std::size_t{0});
        if (options.max_coords_per_tensor != 0 && options.max_coords_per_tensor < n) {
            for (std::size_t i = 0; i < options.max_coords_per_tensor; ++i) {
                std::swap(coords[i], coords[i + rng.below(n - i)]);
            }
            coords.resize(options.max_coords_per_tensor);
            std::sort(coords.begin(), coords.end());
        }
        for (std::size_t idx : coords) {
            double& theta = probe.params[t][idx];
            const double saved = theta;
            theta = saved + options.h;
            const Evaluation plus = evaluate(probe, input, target);
            theta = saved - options.h;
            const Evaluation minus = evaluate(probe, input, target);
            theta = saved;
            if (plus.signature != base_signature || minus.signature != base_signature) {
                ++report.skipped_nonsmooth;
                continue;
            }
            const double numeric = (plus.loss - minus.loss) / (2.0 * options.h);
            const double analytic = grads[t][idx];
            const double err = relative_error(analytic, numeric, options.rel_floor);
            ++report.checked;
            if (report.checked == 1 || err > report.max_rel_error) {
                report.max_rel_error = err;
                report.worst_tensor = t;
                report.worst_index = idx;
                report.worst_analytic = analytic;
                report.worst_numeric = numeric;
            }
        }
    }
    return report;
}

}  // namespace crowdnoise::engine
