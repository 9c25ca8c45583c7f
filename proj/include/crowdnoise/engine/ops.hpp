#pragma once

#include "crowdnoise/engine/tensor.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace crowdnoise::engine {

struct ConvGeometry {
    std::size_t stride = 1;
    std::size_t padding = 0;
    std::size_t dilation = 1;
};

/// Output extent of a convolution along one axis; 0 when the geometry does not fit.
std::size_t conv_output_extent(std::size_t in, std::size_t kernel, const ConvGeometry& g);

/// Cross-correlation with zero padding. weights: (out_ch, in_ch, k, k); bias
/// has out_ch entries.
template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& input, const Tensor4<T>& weights, std::span<const T> bias,
                          const ConvGeometry& geometry);

template <typename T>
struct ConvGrads {
    Tensor4<T> input;
    Tensor4<T> weights;
    std::vector<T> bias;
};

/// Gradients of the forward map given the upstream gradient of its output.
/// `saved_input` must be the forward input; an empty tensor is a contract violation.
template <typename T>
ConvGrads<T> conv2d_backward(const Tensor4<T>& saved_input, const Tensor4<T>& weights, const Tensor4<T>& upstream,
                             const ConvGeometry& geometry, bool need_input_grad = true);

/// Forward result of max-pooling plus what backward needs. argmax[i] is the
/// flat input index feeding output element i.
template <typename T>
struct PoolResult {
    Tensor4<T> output;
    std::vector<std::size_t> argmax;
    Shape4 input_shape;
};

template <typename T>
PoolResult<T> maxpool_forward(const Tensor4<T>& input, std::size_t window = 2, std::size_t stride = 2);

template <typename T>
Tensor4<T> maxpool_backward(const std::vector<std::size_t>& argmax, const Shape4& input_shape,
                            const Tensor4<T>& upstream);

template <typename T>
Tensor4<T> relu_forward(const Tensor4<T>& input);

/// Masks upstream by input > 0; the subgradient at exactly 0 is 0.
template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& saved_input, const Tensor4<T>& upstream);

template <typename T>
struct Loss {
    double value = 0.0;
    Tensor4<T> grad;  // d value / d pred
};

/// (1/B) * sum over samples of the squared L2 distance between maps.
template <typename T>
Loss<T> mse_loss(const Tensor4<T>& pred, const Tensor4<T>& target);

}  // namespace crowdnoise::engine
