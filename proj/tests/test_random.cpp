#include "crowdnoise/binary_io.hpp"
#include "crowdnoise/errors.hpp"
#include "crowdnoise/random.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <set>

using namespace crowdnoise;

TEST_CASE("hash_name matches FNV-1a reference values") {
    CHECK(hash_name("") == 0xcbf29ce484222325ULL);
    CHECK(hash_name("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(hash_name("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("splitmix64 matches the reference sequence") {
    // Reference generator: state += golden gamma, then the two xor-multiply rounds.
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
    CHECK(splitmix64(0x9e3779b97f4a7c15ULL) == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("derived seeds are distinct across stages and indices") {
    std::set<std::uint64_t> seen;
    for (const char* stage : {"scene", "split", "missing", "shuffle", "augment"}) {
        for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(1, stage, i));
        seen.insert(derive_seed(1, stage));
    }
    CHECK(seen.size() == 5 * 101);
    CHECK(derive_seed(1, "split") != derive_seed(2, "split"));
    CHECK(derive_seed(7, "x", 3) == derive_seed(7, "x", 3));
}

TEST_CASE("Rng draws are reproducible and in range") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform01();
        CHECK(u == b.uniform01());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    Rng r(3);
    std::array<int, 7> hist{};
    for (int i = 0; i < 70000; ++i) {
        const auto k = r.below(7);
        REQUIRE(k < 7);
        ++hist[k];
    }
    for (int h : hist) CHECK(std::abs(h - 10000) < 500);
    for (int i = 0; i < 1000; ++i) {
        const auto v = r.integer(-2, 2);
        CHECK(v >= -2);
        CHECK(v <= 2);
    }
}

TEST_CASE("Rng normal has unit moments") {
    Rng r(11);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s += x;
        s2 += x * x;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("ByteWriter and ByteReader round-trip little-endian values") {
    io::ByteWriter w;
    w.u32(0x01020304u);
    w.u64(0x1122334455667788ULL);
    w.f32(1.5f);
    w.text("NNCK");
    const auto& d = w.data();
    REQUIRE(d.size() == 4 + 8 + 4 + 4);
    CHECK(d[0] == 0x04);
    CHECK(d[3] == 0x01);
    CHECK(d[4] == 0x88);
    io::ByteReader r(d, "mem");
    CHECK(r.u32() == 0x01020304u);
    CHECK(r.u64() == 0x1122334455667788ULL);
    CHECK(r.f32() == 1.5f);
    CHECK(r.text(4) == "NNCK");
    CHECK(r.remaining() == 0);
    CHECK_THROWS_AS(r.u32(), IoError);
}

TEST_CASE("reading a missing file names the path") {
    const auto dir = oracle::scratch_dir("random_io");
    try {
        io::read_file(dir / "absent.bin");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("absent.bin") != std::string::npos);
    }
}
