#include "crowdnoise/engine/checkpoint.hpp"

#include "crowdnoise/binary_io.hpp"
#include "crowdnoise/errors.hpp"

namespace crowdnoise::engine {

std::vector<std::uint8_t> encode_checkpoint(const NetworkState<float>& state) {
    io::ByteWriter w;
    w.text("NNCK");
    w.u32(kCheckpointVersion);
    const std::string spec = encode_spec(state.spec);
    w.u64(spec.size());
    w.text(spec);
    for (std::size_t i = 0; i < state.params.size(); ++i) {
        const Shape4& s = state.params[i].shape();
        if (i % 2 == 0) {
            w.u32(4);
            w.u32(static_cast<std::uint32_t>(s.n));
            w.u32(static_cast<std::uint32_t>(s.c));
            w.u32(static_cast<std::uint32_t>(s.h));
            w.u32(static_cast<std::uint32_t>(s.w));
        } else {
            w.u32(1);
            w.u32(static_cast<std::uint32_t>(s.n));
        }
        for (float v : state.params[i].values()) w.f32(v);
    }
    return w.data();
}

NetworkState<float> decode_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
    io::ByteReader r(bytes, origin);
    if (r.text(4) != "NNCK") throw IoError(origin, "bad checkpoint magic");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) throw IoError(origin, "unsupported checkpoint version " + std::to_string(version));
    const std::uint64_t len = r.u64();
    if (len > r.remaining()) throw IoError(origin, "truncated checkpoint spec");

    NetworkState<float> state;
    try {
        state.spec = decode_spec(r.text(static_cast<std::size_t>(len)));
    } catch (const InvalidArgument& e) {
        throw IoError(origin, e.what());
    }
    for (const Shape4& expected : parameter_shapes(state.spec)) {
        const std::uint32_t rank = r.u32();
        std::vector<std::uint32_t> dims(rank);
        for (auto& d : dims) d = r.u32();
        Shape4 got{};
        if (rank == 4) {
            got = {dims[0], dims[1], dims[2], dims[3]};
        } else if (rank == 1) {
            got = {dims[0], 1, 1, 1};
        } else {
            throw IoError(origin, "unexpected tensor rank " + std::to_string(rank));
        }
        if (got != expected) {
            throw IoError(origin, "tensor shape " + got.str() + " does not match spec " + expected.str());
        }
        Tensor4<float> t(got);
        for (auto& v : t.values()) v = r.f32();
        state.params.push_back(std::move(t));
    }
    if (r.remaining() != 0) throw IoError(origin, "trailing bytes after last tensor");
    return state;
}

void save_checkpoint(const std::filesystem::path& path, const NetworkState<float>& state) {
    io::write_file(path, encode_checkpoint(state));
}

NetworkState<float> load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(io::read_file(path), path.string());
}

}  // namespace crowdnoise::engine
