#include "crowdnoise/engine/network.hpp"

#include "crowdnoise/errors.hpp"
#include "crowdnoise/random.hpp"

#include <json.hpp>

#include <cmath>

using nlohmann::json;

namespace crowdnoise::engine {

LayerSpec LayerSpec::conv(std::size_t in_ch, std::size_t out_ch, std::size_t kernel, std::size_t dilation) {
    LayerSpec l;
    l.kind = LayerKind::conv;
    l.in_ch = in_ch;
    l.out_ch = out_ch;
    l.kernel = kernel;
    l.stride = 1;
    l.dilation = dilation;
    l.padding = dilation * (kernel - 1) / 2;  // "same" output size
    return l;
}

LayerSpec LayerSpec::maxpool(std::size_t window, std::size_t stride) {
    LayerSpec l;
    l.kind = LayerKind::maxpool;
    l.kernel = window;
    l.stride = stride;
    return l;
}

LayerSpec LayerSpec::relu() { return LayerSpec{}; }

std::size_t LayerSpec::parameter_count() const {
    if (kind != LayerKind::conv) return 0;
    return kernel * kernel * in_ch * out_ch + out_ch;
}

void validate(const NetworkSpec& spec) {
    auto fail = [&](const std::string& why) { return InvalidArgument("network '" + spec.name + "': " + why); };
    if (spec.columns.empty()) throw fail("no columns");
    if (spec.columns.size() > 1 && !spec.fusion) throw fail("several columns need a fusion head");
    std::size_t fused = 0;
    for (std::size_t ci = 0; ci < spec.columns.size(); ++ci) {
        std::size_t ch = spec.in_channels, stride = 1;
        for (const auto& l : spec.columns[ci]) {
            if (l.kind == LayerKind::conv) {
                if (l.in_ch != ch) {
                    throw fail("column " + std::to_string(ci) + ": conv expects " + std::to_string(l.in_ch) +
                               " channels, gets " + std::to_string(ch));
                }
                if (l.kernel % 2 == 0 || l.dilation == 0 || l.out_ch == 0) throw fail("bad conv layer");
                ch = l.out_ch;
                stride *= l.stride;
            } else if (l.kind == LayerKind::maxpool) {
                if (l.kernel == 0 || l.stride == 0) throw fail("bad maxpool layer");
                stride *= l.stride;
            }
        }
        if (stride != spec.output_stride) {
            throw fail("column " + std::to_string(ci) + " has stride " + std::to_string(stride) + ", declared " +
                       std::to_string(spec.output_stride));
        }
        fused += ch;
    }
    if (spec.fusion && spec.fusion->in_ch != fused) {
        throw fail("fusion expects " + std::to_string(spec.fusion->in_ch) + " channels, columns give " +
                   std::to_string(fused));
    }
}

std::size_t parameter_count(const NetworkSpec& spec) {
    std::size_t total = 0;
    for (const auto& col : spec.columns)
        for (const auto& l : col) total += l.parameter_count();
    if (spec.fusion) total += spec.fusion->in_ch * spec.fusion->out_ch + spec.fusion->out_ch;
    return total;
}

namespace {

const char* kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::conv: return "conv";
        case LayerKind::maxpool: return "maxpool";
        case LayerKind::relu: return "relu";
    }
    return "relu";
}

json layer_json(const LayerSpec& l) {
    json j{{"kind", kind_name(l.kind)}};
    if (l.kind == LayerKind::conv) {
        j["in_ch"] = l.in_ch;
        j["out_ch"] = l.out_ch;
        j["kernel"] = l.kernel;
        j["stride"] = l.stride;
        j["padding"] = l.padding;
        j["dilation"] = l.dilation;
    } else if (l.kind == LayerKind::maxpool) {
        j["window"] = l.kernel;
        j["stride"] = l.stride;
    }
    return j;
}

LayerSpec layer_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    LayerSpec l;
    if (kind == "conv") {
        l.kind = LayerKind::conv;
        l.in_ch = j.at("in_ch").get<std::size_t>();
        l.out_ch = j.at("out_ch").get<std::size_t>();
        l.kernel = j.at("kernel").get<std::size_t>();
        l.stride = j.at("stride").get<std::size_t>();
        l.padding = j.at("padding").get<std::size_t>();
        l.dilation = j.at("dilation").get<std::size_t>();
    } else if (kind == "maxpool") {
        l.kind = LayerKind::maxpool;
        l.kernel = j.at("window").get<std::size_t>();
        l.stride = j.at("stride").get<std::size_t>();
    } else if (kind == "relu") {
        l.kind = LayerKind::relu;
    } else {
        throw InvalidArgument("unknown layer kind '" + kind + "'");
    }
    return l;
}

}  // namespace

std::string encode_spec(const NetworkSpec& spec) {
    json cols = json::array();
    for (const auto& col : spec.columns) {
        json layers = json::array();
        for (const auto& l : col) layers.push_back(layer_json(l));
        cols.push_back(std::move(layers));
    }
    json j{{"name", spec.name},
           {"in_channels", spec.in_channels},
           {"columns", std::move(cols)},
           {"output_stride", spec.output_stride}};
    j["fusion"] = spec.fusion ? json{{"in_ch", spec.fusion->in_ch}, {"out_ch", spec.fusion->out_ch}} : json(nullptr);
    return j.dump();
}

NetworkSpec decode_spec(const std::string& json_text) {
    try {
        const json j = json::parse(json_text);
        NetworkSpec spec;
        spec.name = j.at("name").get<std::string>();
        spec.in_channels = j.at("in_channels").get<std::size_t>();
        spec.output_stride = j.at("output_stride").get<std::size_t>();
        for (const auto& col : j.at("columns")) {
            std::vector<LayerSpec> layers;
            for (const auto& l : col) layers.push_back(layer_from_json(l));
            spec.columns.push_back(std::move(layers));
        }
        if (j.contains("fusion") && !j["fusion"].is_null()) {
            spec.fusion = FusionSpec{j["fusion"].at("in_ch").get<std::size_t>(),
                                     j["fusion"].at("out_ch").get<std::size_t>()};
        }
        validate(spec);
        return spec;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed network spec: ") + e.what());
    }
}

std::vector<Shape4> parameter_shapes(const NetworkSpec& spec) {
    std::vector<Shape4> shapes;
    for (const auto& col : spec.columns) {
        for (const auto& l : col) {
            if (l.kind != LayerKind::conv) continue;
            shapes.push_back({l.out_ch, l.in_ch, l.kernel, l.kernel});
            shapes.push_back({l.out_ch, 1, 1, 1});
        }
    }
    if (spec.fusion) {
        shapes.push_back({spec.fusion->out_ch, spec.fusion->in_ch, 1, 1});
        shapes.push_back({spec.fusion->out_ch, 1, 1, 1});
    }
    return shapes;
}

template <typename T>
std::size_t NetworkState<T>::parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params) n += p.size();
    return n;
}

template <typename T>
NetworkState<T> init_network(const NetworkSpec& spec, std::uint64_t seed) {
    validate(spec);
    NetworkState<T> state;
    state.spec = spec;
    Rng rng(seed);
    const auto shapes = parameter_shapes(spec);
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        Tensor4<T> t(shapes[i]);
        if (i % 2 == 0) {
            const double fan_in = double(shapes[i].c * shapes[i].h * shapes[i].w);
            const double sd = std::sqrt(2.0 / fan_in);
            for (auto& v : t.values()) v = static_cast<T>(sd * rng.normal());
        }
        state.params.push_back(std::move(t));
    }
    return state;
}

template <typename T>
ParamList<T> zeros_like(const ParamList<T>& params) {
    ParamList<T> out;
    out.reserve(params.size());
    for (const auto& p : params) out.emplace_back(p.shape());
    return out;
}

namespace {

std::span<const float> bias_span(const Tensor4<float>& t) { return t.values(); }
std::span<const double> bias_span(const Tensor4<double>& t) { return t.values(); }

template <typename T>
Tensor4<T> concat_channels(const std::vector<Tensor4<T>>& parts) {
    const Shape4 first = parts.front().shape();
    std::size_t channels = 0;
    for (const auto& p : parts) channels += p.shape().c;
    Tensor4<T> out(Shape4{first.n, channels, first.h, first.w});
    const std::size_t plane = first.h * first.w;
    for (std::size_t n = 0; n < first.n; ++n) {
        T* dst = out.sample(n);
        for (const auto& p : parts) {
            if (p.shape().n != first.n || p.shape().h != first.h || p.shape().w != first.w) {
                throw ContractViolation("fusion: column outputs differ in shape (" + p.shape().str() + " vs " +
                                        first.str() + ")");
            }
            const std::size_t count = p.shape().c * plane;
            std::copy(p.sample(n), p.sample(n) + count, dst);
            dst += count;
        }
    }
    return out;
}

}  // namespace

template <typename T>
Tensor4<T> forward(const NetworkState<T>& state, const Tensor4<T>& input, ForwardTrace<T>* trace) {
    const NetworkSpec& spec = state.spec;
    if (input.shape().c != spec.in_channels) {
        throw InvalidArgument("forward: network '" + spec.name + "' takes " + std::to_string(spec.in_channels) +
                              " channels, input is " + input.shape().str());
    }
    if (trace) {
        trace->columns.assign(spec.columns.size(), {});
        trace->column_shapes.clear();
    }
    std::vector<Tensor4<T>> outputs;
    std::size_t p = 0;
    for (std::size_t ci = 0; ci < spec.columns.size(); ++ci) {
        Tensor4<T> x = input;
        for (const auto& layer : spec.columns[ci]) {
            typename ForwardTrace<T>::Step step;
            step.kind = layer.kind;
            step.input_shape = x.shape();
            switch (layer.kind) {
                case LayerKind::conv: {
                    Tensor4<T> y = conv2d_forward(x, state.params[p], bias_span(state.params[p + 1]), layer.geometry());
                    p += 2;
                    if (trace) step.input = std::move(x);
                    x = std::move(y);
                    break;
                }
                case LayerKind::relu: {
                    Tensor4<T> y = relu_forward(x);
                    if (trace) step.input = std::move(x);
                    x = std::move(y);
                    break;
                }
                case LayerKind::maxpool: {
                    auto r = maxpool_forward(x, layer.kernel, layer.stride);
                    if (trace) step.argmax = std::move(r.argmax);
                    x = std::move(r.output);
                    break;
                }
            }
            if (trace) trace->columns[ci].push_back(std::move(step));
        }
        outputs.push_back(std::move(x));
    }
    if (!spec.fusion) return std::move(outputs.front());

    Tensor4<T> fused = concat_channels(outputs);
    Tensor4<T> out = conv2d_forward(fused, state.params[p], bias_span(state.params[p + 1]), ConvGeometry{});
    if (trace) {
        for (const auto& o : outputs) trace->column_shapes.push_back(o.shape());
        trace->fusion_input = std::move(fused);
    }
    return out;
}

template <typename T>
void backward(const NetworkState<T>& state, const ForwardTrace<T>& trace, const Tensor4<T>& grad_output,
              ParamList<T>& grads, Tensor4<T>* grad_input) {
    const NetworkSpec& spec = state.spec;
    if (trace.columns.size() != spec.columns.size()) throw ContractViolation("backward: trace does not match network");
    if (grads.size() != state.params.size()) throw ContractViolation("backward: gradient list does not match params");

    auto accumulate = [&](std::size_t index, const Tensor4<T>& g) {
        auto dst = grads[index].values();
        auto src = g.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    };
    auto accumulate_bias = [&](std::size_t index, const std::vector<T>& g) {
        auto dst = grads[index].values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
    };

    // First param index of each column.
    std::vector<std::size_t> col_param(spec.columns.size() + 1, 0);
    for (std::size_t ci = 0; ci < spec.columns.size(); ++ci) {
        std::size_t convs = 0;
        for (const auto& l : spec.columns[ci]) convs += l.kind == LayerKind::conv ? 1 : 0;
        col_param[ci + 1] = col_param[ci] + 2 * convs;
    }

    std::vector<Tensor4<T>> col_grads;
    if (spec.fusion) {
        const std::size_t p = col_param.back();
        if (trace.fusion_input.empty()) throw ContractViolation("backward: trace lacks the fusion input");
        ConvGrads<T> g = conv2d_backward(trace.fusion_input, state.params[p], grad_output, ConvGeometry{});
        accumulate(p, g.weights);
        accumulate_bias(p + 1, g.bias);
        // Split along channels.
        const Shape4 fs = g.input.shape();
        const std::size_t plane = fs.h * fs.w;
        std::size_t offset = 0;
        for (const Shape4& shape : trace.column_shapes) {
            Tensor4<T> part(shape);
            for (std::size_t n = 0; n < fs.n; ++n) {
                const T* src = g.input.sample(n) + offset * plane;
                std::copy(src, src + shape.c * plane, part.sample(n));
            }
            offset += shape.c;
            col_grads.push_back(std::move(part));
        }
    } else {
        col_grads.push_back(grad_output);
    }

    if (grad_input) grad_input->storage().clear();
    for (std::size_t ci = 0; ci < spec.columns.size(); ++ci) {
        const auto& layers = spec.columns[ci];
        const auto& steps = trace.columns[ci];
        if (steps.size() != layers.size()) throw ContractViolation("backward: trace column length mismatch");
        Tensor4<T> g = std::move(col_grads[ci]);
        std::size_t p = col_param[ci + 1];
        for (std::size_t li = layers.size(); li-- > 0;) {
            const auto& layer = layers[li];
            const auto& step = steps[li];
            switch (layer.kind) {
                case LayerKind::conv: {
                    p -= 2;
                    const bool need_input = grad_input != nullptr || li > 0;
                    ConvGrads<T> cg = conv2d_backward(step.input, state.params[p], g, layer.geometry(), need_input);
                    accumulate(p, cg.weights);
                    accumulate_bias(p + 1, cg.bias);
                    g = std::move(cg.input);
                    break;
                }
                case LayerKind::relu: g = relu_backward(step.input, g); break;
                case LayerKind::maxpool: g = maxpool_backward(step.argmax, step.input_shape, g); break;
            }
        }
        if (grad_input) {
            if (grad_input->empty()) {
                *grad_input = std::move(g);
            } else {
                for (std::size_t i = 0; i < g.size(); ++i) (*grad_input)[i] += g[i];
            }
        }
    }
}

template <typename T>
std::uint64_t activation_signature(const ForwardTrace<T>& trace) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    auto mix = [&h](std::uint64_t v) { h = splitmix64(h ^ v); };
    for (std::size_t ci = 0; ci < trace.columns.size(); ++ci) {
        for (const auto& step : trace.columns[ci]) {
            if (step.kind == LayerKind::maxpool) {
                for (std::size_t a : step.argmax) mix(a);
            } else if (step.kind == LayerKind::relu) {
                std::uint64_t word = 0;
                std::size_t bits = 0;
                for (T v : step.input.values()) {
                    word = (word << 1) | (v > T(0) ? 1u : 0u);
                    if (++bits == 64) {
                        mix(word);
                        word = 0;
                        bits = 0;
                    }
                }
                mix(word ^ bits);
            }
        }
    }
    return h;
}

#define CROWDNOISE_INSTANTIATE_NETWORK(T)                                                                   \
    template struct NetworkState<T>;                                                                        \
    template NetworkState<T> init_network<T>(const NetworkSpec&, std::uint64_t);                            \
    template ParamList<T> zeros_like(const ParamList<T>&);                                                  \
    template Tensor4<T> forward(const NetworkState<T>&, const Tensor4<T>&, ForwardTrace<T>*);               \
    template void backward(const NetworkState<T>&, const ForwardTrace<T>&, const Tensor4<T>&, ParamList<T>&, \
                           Tensor4<T>*);                                                                    \
    template std::uint64_t activation_signature(const ForwardTrace<T>&);

CROWDNOISE_INSTANTIATE_NETWORK(float)
CROWDNOISE_INSTANTIATE_NETWORK(double)

}  // namespace crowdnoise::engine
