#pragma once

#include "crowdnoise/engine/ops.hpp"
#include "crowdnoise/engine/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace crowdnoise::engine {

enum class LayerKind { conv, maxpool, relu };

struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    // conv
    std::size_t in_ch = 0, out_ch = 0, kernel = 1, stride = 1, padding = 0, dilation = 1;
    // maxpool reuses `kernel` as the window and `stride`

    static LayerSpec conv(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t dilation = 1);
    static LayerSpec maxpool(std::size_t window = 2, std::size_t stride = 2);
    static LayerSpec relu();

    ConvGeometry geometry() const { return {stride, padding, dilation}; }
    std::size_t parameter_count() const;
    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Channel concatenation of all column outputs followed by a 1x1 conv.
struct FusionSpec {
    std::size_t in_ch = 0;
    std::size_t out_ch = 1;
    friend bool operator==(const FusionSpec&, const FusionSpec&) = default;
};

/// Layer plan. A single column with no fusion is a plain sequential net.
struct NetworkSpec {
    std::string name;
    std::size_t in_channels = 1;
    std::vector<std::vector<LayerSpec>> columns;
    std::optional<FusionSpec> fusion;
    std::size_t output_stride = 1;

    friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Checks channel chaining, fusion width and that pools compose to output_stride.
void validate(const NetworkSpec& spec);

/// Sum over conv layers (and the fusion conv) of k*k*c_in*c_out + c_out.
std::size_t parameter_count(const NetworkSpec& spec);

std::string encode_spec(const NetworkSpec& spec);  // JSON
NetworkSpec decode_spec(const std::string& json_text);

/// Parameter shapes in declaration order: for each conv (columns in order,
/// then fusion) its weights (out, in, k, k) followed by its bias (out, 1, 1, 1).
std::vector<Shape4> parameter_shapes(const NetworkSpec& spec);

template <typename T>
using ParamList = std::vector<Tensor4<T>>;

template <typename T>
struct NetworkState {
    NetworkSpec spec;
    ParamList<T> params;

    std::size_t parameter_count() const;
};

/// He-normal weights (std sqrt(2 / fan_in)), zero biases.
template <typename T>
NetworkState<T> init_network(const NetworkSpec& spec, std::uint64_t seed);

template <typename To, typename From>
NetworkState<To> state_cast(const NetworkState<From>& s) {
    NetworkState<To> out{s.spec, {}};
    for (const auto& p : s.params) out.params.push_back(tensor_cast<To>(p));
    return out;
}

/// Zero-filled tensors shaped like the parameters.
template <typename T>
ParamList<T> zeros_like(const ParamList<T>& params);

/// Per-layer saved state of one forward pass.
template <typename T>
struct ForwardTrace {
    struct Step {
        LayerKind kind = LayerKind::relu;
        Tensor4<T> input;                 // conv / relu
        std::vector<std::size_t> argmax;  // maxpool
        Shape4 input_shape;
    };
    std::vector<std::vector<Step>> columns;
    std::vector<Shape4> column_shapes;  // to split the fusion gradient
    Tensor4<T> fusion_input;
};

/// Pure function of (params, input). Fills `trace` when given.
template <typename T>
Tensor4<T> forward(const NetworkState<T>& state, const Tensor4<T>& input, ForwardTrace<T>* trace = nullptr);

/// Accumulates d loss / d params into `grads` (shaped like state.params).
/// Optionally returns d loss / d input.
template <typename T>
void backward(const NetworkState<T>& state, const ForwardTrace<T>& trace, const Tensor4<T>& grad_output,
              ParamList<T>& grads, Tensor4<T>* grad_input = nullptr);

/// Hash of the ReLU on/off pattern and the pooling argmaxes of a forward
/// pass. Two passes with equal signatures ran through the same smooth piece
/// of the network.
template <typename T>
std::uint64_t activation_signature(const ForwardTrace<T>& trace);

}  // namespace crowdnoise::engine
