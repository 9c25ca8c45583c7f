#include "crowdnoise/modelzoo/predict.hpp"

#include "crowdnoise/errors.hpp"

#include <algorithm>

namespace crowdnoise::modelzoo {

engine::Tensor4<float> image_tensor(const labelcraft::GrayImage& image) {
    return engine::Tensor4<float>(engine::Shape4{1, 1, image.height, image.width}, image.values);
}

labelcraft::DensityMap to_density(const engine::Tensor4<float>& output) {
    const auto& s = output.shape();
    labelcraft::DensityMap map(s.h, s.w);
    for (std::size_t i = 0; i < s.h * s.w; ++i) map.values[i] = output[i];
    return map;
}

labelcraft::DensityMap predict_density(const engine::NetworkState<float>& state, const engine::Tensor4<float>& image) {
    const auto& s = image.shape();
    const std::size_t stride = state.spec.output_stride;
    if (s.n != 1) throw InvalidArgument("predict_density: expects a single image, got " + s.str());
    if (s.h % stride != 0 || s.w % stride != 0) {
        throw InvalidArgument("predict_density: image " + std::to_string(s.h) + "x" + std::to_string(s.w) +
                              " not divisible by output stride " + std::to_string(stride) + " (pad or crop first)");
    }
    labelcraft::DensityMap map = to_density(engine::forward(state, image));
    for (double& v : map.values) v = std::max(v, 0.0);
    return map;
}

labelcraft::DensityMap predict_density(const engine::NetworkState<float>& state, const labelcraft::GrayImage& image) {
    return predict_density(state, image_tensor(image));
}

}  // namespace crowdnoise::modelzoo
