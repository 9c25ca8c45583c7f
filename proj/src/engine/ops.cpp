#include "crowdnoise/engine/ops.hpp"

#include "crowdnoise/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <limits>

namespace crowdnoise::engine {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

struct ConvDims {
    std::size_t n, cin, h, w, cout, k, oh, ow;
    std::size_t patch() const { return cin * k * k; }
    std::size_t pixels() const { return oh * ow; }
};

template <typename T>
ConvDims check_conv(const Tensor4<T>& input, const Tensor4<T>& weights, const ConvGeometry& g) {
    const Shape4& in = input.shape();
    const Shape4& wt = weights.shape();
    auto mismatch = [&](const std::string& why) {
        return InvalidArgument("conv2d: " + why + " (input " + in.str() + ", weights " + wt.str() + ")");
    };
    if (g.stride == 0 || g.dilation == 0) throw mismatch("stride and dilation must be >= 1");
    if (wt.h != wt.w || wt.h % 2 == 0) throw mismatch("kernel must be square and odd");
    if (wt.c != in.c) throw mismatch("input channels do not match weights");
    const std::size_t oh = conv_output_extent(in.h, wt.h, g);
    const std::size_t ow = conv_output_extent(in.w, wt.w, g);
    if (oh == 0 || ow == 0) throw mismatch("geometry yields an empty output");
    return {in.n, in.c, in.h, in.w, wt.n, wt.h, oh, ow};
}

bool is_pointwise(const ConvDims& d, const ConvGeometry& g) {
    return d.k == 1 && g.stride == 1 && g.padding == 0;
}

// Unfolds one sample into a (cin*k*k) x (oh*ow) matrix.
template <typename T>
void im2col(const T* src, const ConvDims& d, const ConvGeometry& g, T* cols) {
    const auto pad = static_cast<std::ptrdiff_t>(g.padding);
    for (std::size_t ci = 0; ci < d.cin; ++ci) {
        const T* plane = src + ci * d.h * d.w;
        for (std::size_t ky = 0; ky < d.k; ++ky) {
            for (std::size_t kx = 0; kx < d.k; ++kx) {
                T* row = cols + ((ci * d.k + ky) * d.k + kx) * d.pixels();
                for (std::size_t oy = 0; oy < d.oh; ++oy) {
                    const std::ptrdiff_t iy = std::ptrdiff_t(oy * g.stride + ky * g.dilation) - pad;
                    T* out = row + oy * d.ow;
                    if (iy < 0 || iy >= std::ptrdiff_t(d.h)) {
                        std::fill(out, out + d.ow, T(0));
                        continue;
                    }
                    const T* line = plane + iy * d.w;
                    for (std::size_t ox = 0; ox < d.ow; ++ox) {
                        const std::ptrdiff_t ix = std::ptrdiff_t(ox * g.stride + kx * g.dilation) - pad;
                        out[ox] = (ix < 0 || ix >= std::ptrdiff_t(d.w)) ? T(0) : line[ix];
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatters-adds columns back into one sample.
template <typename T>
void col2im(const T* cols, const ConvDims& d, const ConvGeometry& g, T* dst) {
    const auto pad = static_cast<std::ptrdiff_t>(g.padding);
    for (std::size_t ci = 0; ci < d.cin; ++ci) {
        T* plane = dst + ci * d.h * d.w;
        for (std::size_t ky = 0; ky < d.k; ++ky) {
            for (std::size_t kx = 0; kx < d.k; ++kx) {
                const T* row = cols + ((ci * d.k + ky) * d.k + kx) * d.pixels();
                for (std::size_t oy = 0; oy < d.oh; ++oy) {
                    const std::ptrdiff_t iy = std::ptrdiff_t(oy * g.stride + ky * g.dilation) - pad;
                    if (iy < 0 || iy >= std::ptrdiff_t(d.h)) continue;
                    T* line = plane + iy * d.w;
                    const T* in = row + oy * d.ow;
                    for (std::size_t ox = 0; ox < d.ow; ++ox) {
                        const std::ptrdiff_t ix = std::ptrdiff_t(ox * g.stride + kx * g.dilation) - pad;
                        if (ix >= 0 && ix < std::ptrdiff_t(d.w)) line[ix] += in[ox];
                    }
                }
            }
        }
    }
}

}  // namespace

std::size_t conv_output_extent(std::size_t in, std::size_t kernel, const ConvGeometry& g) {
    const std::size_t span = g.dilation * (kernel - 1) + 1;
    const std::size_t padded = in + 2 * g.padding;
    if (padded < span || g.stride == 0) return 0;
    return (padded - span) / g.stride + 1;
}

template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& input, const Tensor4<T>& weights, std::span<const T> bias,
                          const ConvGeometry& geometry) {
    const ConvDims d = check_conv(input, weights, geometry);
    if (bias.size() != d.cout) {
        throw InvalidArgument("conv2d: bias has " + std::to_string(bias.size()) + " entries, expected " +
                              std::to_string(d.cout));
    }
    Tensor4<T> out(Shape4{d.n, d.cout, d.oh, d.ow});
    const ConstMapMat<T> wmat(weights.data(), d.cout, d.patch());
    AlignedVector<T> cols;
    if (!is_pointwise(d, geometry)) cols.resize(d.patch() * d.pixels());

    for (std::size_t s = 0; s < d.n; ++s) {
        const T* src = input.sample(s);
        if (!cols.empty()) {
            im2col(src, d, geometry, cols.data());
            src = cols.data();
        }
        const ConstMapMat<T> cmat(src, d.patch(), d.pixels());
        MapMat<T> omat(out.sample(s), d.cout, d.pixels());
        omat.noalias() = wmat * cmat;
        for (std::size_t co = 0; co < d.cout; ++co) omat.row(co).array() += bias[co];
    }
    return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor4<T>& saved_input, const Tensor4<T>& weights, const Tensor4<T>& upstream,
                             const ConvGeometry& geometry, bool need_input_grad) {
    if (saved_input.empty()) throw ContractViolation("conv2d_backward: no saved forward input");
    const ConvDims d = check_conv(saved_input, weights, geometry);
    const Shape4 expected{d.n, d.cout, d.oh, d.ow};
    if (upstream.shape() != expected) {
        throw InvalidArgument("conv2d_backward: upstream " + upstream.shape().str() + " but forward output is " +
                              expected.str());
    }

    ConvGrads<T> g;
    g.weights = Tensor4<T>(weights.shape());
    g.bias.assign(d.cout, T(0));
    if (need_input_grad) g.input = Tensor4<T>(saved_input.shape());

    const ConstMapMat<T> wmat(weights.data(), d.cout, d.patch());
    MapMat<T> gw(g.weights.data(), d.cout, d.patch());
    const bool pointwise = is_pointwise(d, geometry);
    AlignedVector<T> cols, gcols;
    if (!pointwise) {
        cols.resize(d.patch() * d.pixels());
        if (need_input_grad) gcols.resize(cols.size());
    }

    for (std::size_t s = 0; s < d.n; ++s) {
        const ConstMapMat<T> up(upstream.sample(s), d.cout, d.pixels());
        const T* src = saved_input.sample(s);
        if (!pointwise) {
            im2col(src, d, geometry, cols.data());
            src = cols.data();
        }
        const ConstMapMat<T> cmat(src, d.patch(), d.pixels());
        gw.noalias() += up * cmat.transpose();
        for (std::size_t co = 0; co < d.cout; ++co) g.bias[co] += up.row(co).sum();

        if (need_input_grad) {
            if (pointwise) {
                MapMat<T> gin(g.input.sample(s), d.patch(), d.pixels());
                gin.noalias() = wmat.transpose() * up;
            } else {
                MapMat<T> gc(gcols.data(), d.patch(), d.pixels());
                gc.noalias() = wmat.transpose() * up;
                col2im(gcols.data(), d, geometry, g.input.sample(s));
            }
        }
    }
    return g;
}

template <typename T>
PoolResult<T> maxpool_forward(const Tensor4<T>& input, std::size_t window, std::size_t stride) {
    const Shape4& s = input.shape();
    if (window == 0 || stride == 0) throw InvalidArgument("maxpool: window and stride must be >= 1");
    if (s.h % stride != 0 || s.w % stride != 0 || s.h < window || s.w < window) {
        throw InvalidArgument("maxpool: input " + s.str() + " not divisible by stride " + std::to_string(stride));
    }
    const std::size_t oh = (s.h - window) / stride + 1;
    const std::size_t ow = (s.w - window) / stride + 1;
    PoolResult<T> r;
    r.input_shape = s;
    r.output = Tensor4<T>(Shape4{s.n, s.c, oh, ow});
    r.argmax.resize(r.output.size());
    std::size_t o = 0;
    for (std::size_t n = 0; n < s.n; ++n) {
        for (std::size_t c = 0; c < s.c; ++c) {
            for (std::size_t y = 0; y < oh; ++y) {
                for (std::size_t x = 0; x < ow; ++x, ++o) {
                    std::size_t best = input.index(n, c, y * stride, x * stride);
                    T best_v = input[best];
                    for (std::size_t dy = 0; dy < window; ++dy) {
                        for (std::size_t dx = 0; dx < window; ++dx) {
                            const std::size_t i = input.index(n, c, y * stride + dy, x * stride + dx);
                            if (input[i] > best_v) {  // strict: first maximum wins ties
                                best_v = input[i];
                                best = i;
                            }
                        }
                    }
                    r.output[o] = best_v;
                    r.argmax[o] = best;
                }
            }
        }
    }
    return r;
}

template <typename T>
Tensor4<T> maxpool_backward(const std::vector<std::size_t>& argmax, const Shape4& input_shape,
                            const Tensor4<T>& upstream) {
    if (argmax.size() != upstream.size()) {
        throw ContractViolation("maxpool_backward: " + std::to_string(argmax.size()) + " indices for upstream " +
                                upstream.shape().str());
    }
    Tensor4<T> g(input_shape);
    for (std::size_t i = 0; i < argmax.size(); ++i) {
        if (argmax[i] >= g.size()) throw ContractViolation("maxpool_backward: index out of range of input shape");
        g[argmax[i]] += upstream[i];
    }
    return g;
}

template <typename T>
Tensor4<T> relu_forward(const Tensor4<T>& input) {
    Tensor4<T> out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > T(0) ? input[i] : T(0);
    return out;
}

template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& saved_input, const Tensor4<T>& upstream) {
    if (saved_input.shape() != upstream.shape()) {
        throw InvalidArgument("relu_backward: input " + saved_input.shape().str() + " vs upstream " +
                              upstream.shape().str());
    }
    Tensor4<T> g(upstream.shape());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = saved_input[i] > T(0) ? upstream[i] : T(0);
    return g;
}

template <typename T>
Loss<T> mse_loss(const Tensor4<T>& pred, const Tensor4<T>& target) {
    if (pred.shape() != target.shape()) {
        throw InvalidArgument("mse_loss: prediction " + pred.shape().str() + " vs target " + target.shape().str());
    }
    const std::size_t batch = pred.shape().n;
    if (batch == 0) throw InvalidArgument("mse_loss: empty batch");
    Loss<T> loss;
    loss.grad = Tensor4<T>(pred.shape());
    const double inv_b = 1.0 / double(batch);
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double diff = double(pred[i]) - double(target[i]);
        total += diff * diff;
        loss.grad[i] = static_cast<T>(2.0 * diff * inv_b);
    }
    loss.value = total * inv_b;
    return loss;
}

#define CROWDNOISE_INSTANTIATE_OPS(T)                                                                           \
    template Tensor4<T> conv2d_forward(const Tensor4<T>&, const Tensor4<T>&, std::span<const T>,                 \
                                       const ConvGeometry&);                                                    \
    template ConvGrads<T> conv2d_backward(const Tensor4<T>&, const Tensor4<T>&, const Tensor4<T>&,              \
                                          const ConvGeometry&, bool);                                           \
    template PoolResult<T> maxpool_forward(const Tensor4<T>&, std::size_t, std::size_t);                        \
    template Tensor4<T> maxpool_backward(const std::vector<std::size_t>&, const Shape4&, const Tensor4<T>&);    \
    template Tensor4<T> relu_forward(const Tensor4<T>&);                                                        \
    template Tensor4<T> relu_backward(const Tensor4<T>&, const Tensor4<T>&);                                    \
    template Loss<T> mse_loss(const Tensor4<T>&, const Tensor4<T>&);

CROWDNOISE_INSTANTIATE_OPS(float)
CROWDNOISE_INSTANTIATE_OPS(double)

}  // namespace crowdnoise::engine
