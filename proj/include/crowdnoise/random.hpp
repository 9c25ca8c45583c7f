#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace crowdnoise {

// Seed derivation: every stage draws from its own generator keyed by
// (master seed, stage name, index...). Results therefore do not depend on the
// order in which stages or images are processed.

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_name(std::string_view name);  // FNV-1a 64
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage, std::uint64_t index);

// Distribution helpers built straight on the engine's output bits. The stdlib
// distributions are implementation-defined, these are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform01();                            // [0, 1)
    double uniform(double lo, double hi);          // [lo, hi)
    std::uint64_t below(std::uint64_t n);          // [0, n), n > 0, unbiased
    std::int64_t integer(std::int64_t lo, std::int64_t hi);  // inclusive
    bool coin() { return (engine_() >> 63) != 0; }
    double normal();                               // N(0, 1), Box-Muller

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace crowdnoise
