#include "crowdnoise/modelzoo/builders.hpp"

#include "crowdnoise/errors.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace crowdnoise::modelzoo {

using engine::LayerKind;
using engine::LayerSpec;

namespace {

void check_multiplier(double m) {
    if (!(m > 0.0 && m <= 1.0)) {
        throw InvalidArgument("width multiplier must be in (0, 1], got " + std::to_string(m));
    }
}

std::string width_suffix(double m) {
    if (m == 1.0) return {};
    std::ostringstream s;
    s << "-w" << m;
    return s.str();
}

}  // namespace

std::size_t scale_channels(std::size_t channels, double multiplier) {
    check_multiplier(multiplier);
    // The epsilon keeps exact products such as 64 * 0.25 from rounding up.
    const double scaled = std::ceil(double(channels) * multiplier - 1e-9);
    return std::max<std::size_t>(1, static_cast<std::size_t>(scaled));
}

NetworkSpec csrnet_lite_spec(double width_multiplier, std::size_t in_channels) {
    check_multiplier(width_multiplier);
    if (in_channels == 0) throw InvalidArgument("in_channels must be >= 1");
    NetworkSpec spec;
    spec.name = "CSRNet_lite" + width_suffix(width_multiplier);
    spec.in_channels = in_channels;
    spec.output_stride = 4;

    std::vector<LayerSpec> layers;
    std::size_t ch = in_channels;
    auto conv = [&](std::size_t out, std::size_t kernel, std::size_t dilation, bool relu) {
        const std::size_t c = scale_channels(out, width_multiplier);
        layers.push_back(LayerSpec::conv(ch, c, kernel, dilation));
        if (relu) layers.push_back(LayerSpec::relu());
        ch = c;
    };

    // Front-end: VGG-16 conv1_1 .. conv3_3.
    conv(64, 3, 1, true);
    conv(64, 3, 1, true);
    layers.push_back(LayerSpec::maxpool(2, 2));
    conv(128, 3, 1, true);
    conv(128, 3, 1, true);
    layers.push_back(LayerSpec::maxpool(2, 2));
    conv(256, 3, 1, true);
    conv(256, 3, 1, true);
    conv(256, 3, 1, true);

    for (std::size_t c : {256, 256, 256, 128, 64, 64}) conv(c, 3, 2, true);

    // 1x1 output conv is not scaled: always one density channel.
    layers.push_back(LayerSpec::conv(ch, 1, 1, 1));
    spec.columns.push_back(std::move(layers));
    engine::validate(spec);
    return spec;
}

NetworkSpec mcnn_spec(double width_multiplier, std::size_t in_channels) {
    check_multiplier(width_multiplier);
    if (in_channels == 0) throw InvalidArgument("in_channels must be >= 1");
    NetworkSpec spec;
    spec.name = "MCNN" + width_suffix(width_multiplier);
    spec.in_channels = in_channels;
    spec.output_stride = 4;

    struct Column {
        std::size_t kernels[4];
        std::size_t channels[4];
    };
    const Column columns[3] = {
        {{9, 7, 7, 7}, {16, 32, 16, 8}},
        {{7, 5, 5, 5}, {20, 40, 20, 10}},
        {{5, 3, 3, 3}, {24, 48, 24, 12}},
    };
    std::size_t fused = 0;
    for (const Column& col : columns) {
        std::vector<LayerSpec> layers;
        std::size_t ch = in_channels;
        for (int i = 0; i < 4; ++i) {
            const std::size_t c = scale_channels(col.channels[i], width_multiplier);
            layers.push_back(LayerSpec::conv(ch, c, col.kernels[i]));
            layers.push_back(LayerSpec::relu());
            if (i < 2) layers.push_back(LayerSpec::maxpool(2, 2));
            ch = c;
        }
        fused += ch;
        spec.columns.push_back(std::move(layers));
    }
    spec.fusion = engine::FusionSpec{fused, 1};
    engine::validate(spec);
    return spec;
}

NetworkSpec spec_by_name(const std::string& model, double width_multiplier, std::size_t in_channels) {
    if (model == "csrnet_lite") return csrnet_lite_spec(width_multiplier, in_channels);
    if (model == "mcnn") return mcnn_spec(width_multiplier, in_channels);
    throw InvalidArgument("unknown model '" + model + "' (expected csrnet_lite or mcnn)");
}

std::string describe(const NetworkSpec& spec, std::size_t height, std::size_t width) {
    std::ostringstream out;
    out << spec.name << "  input " << spec.in_channels << "x" << height << "x" << width << "  output stride "
        << spec.output_stride << "\n";
    auto row = [&](const std::string& where, const std::string& what, std::size_t c, std::size_t h, std::size_t w,
                   std::size_t params) {
        out << "  " << std::left << std::setw(10) << where << std::setw(34) << what << std::right << std::setw(5)
            << c << " x " << std::setw(4) << h << " x " << std::setw(4) << w << std::setw(12) << params << "\n";
    };
    std::size_t out_h = 0, out_w = 0;
    for (std::size_t ci = 0; ci < spec.columns.size(); ++ci) {
        std::size_t c = spec.in_channels, h = height, w = width;
        const std::string where = spec.columns.size() > 1 ? "col" + std::to_string(ci) : "seq";
        for (const auto& l : spec.columns[ci]) {
            std::ostringstream what;
            switch (l.kind) {
                case LayerKind::conv:
                    what << "conv " << l.kernel << "x" << l.kernel << " " << l.in_ch << "->" << l.out_ch;
                    if (l.dilation != 1) what << " dil " << l.dilation;
                    h = engine::conv_output_extent(h, l.kernel, l.geometry());
                    w = engine::conv_output_extent(w, l.kernel, l.geometry());
                    c = l.out_ch;
                    break;
                case LayerKind::maxpool:
                    what << "maxpool " << l.kernel << "/" << l.stride;
                    h /= l.stride;
                    w /= l.stride;
                    break;
                case LayerKind::relu: what << "relu"; break;
            }
            row(where, what.str(), c, h, w, l.parameter_count());
        }
        out_h = h;
        out_w = w;
    }
    if (spec.fusion) {
        const auto& f = *spec.fusion;
        row("fusion", "concat + conv 1x1 " + std::to_string(f.in_ch) + "->" + std::to_string(f.out_ch), f.out_ch,
            out_h, out_w, f.in_ch * f.out_ch + f.out_ch);
    }
    out << "  total parameters: " << engine::parameter_count(spec) << "\n";
    return out.str();
}

}  // namespace crowdnoise::modelzoo
