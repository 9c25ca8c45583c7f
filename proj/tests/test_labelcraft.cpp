#include "crowdnoise/errors.hpp"
#include "crowdnoise/labelcraft/corruption.hpp"
#include "crowdnoise/labelcraft/dataset.hpp"
#include "crowdnoise/labelcraft/density.hpp"
#include "crowdnoise/labelcraft/formats.hpp"
#include "crowdnoise/labelcraft/scene.hpp"
#include "crowdnoise/random.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <numeric>

using namespace crowdnoise;
using namespace crowdnoise::labelcraft;

namespace {

DotAnnotation dots_of(std::vector<Point2D> pts) { return DotAnnotation{"t", std::move(pts)}; }

DotAnnotation random_dots(Rng& rng, std::size_t n, double h, double w) {
    DotAnnotation d{"r", {}};
    for (std::size_t i = 0; i < n; ++i) d.points.push_back({rng.uniform(0.0, w - 1.0), rng.uniform(0.0, h - 1.0)});
    return d;
}

}  // namespace

TEST_CASE("gaussian kernel") {
    SUBCASE("radius 0 is the single entry 1") {
        const auto k = gaussian_kernel(1.0, 0);
        REQUIRE(k.values.size() == 1);
        CHECK(k.values[0] == 1.0);
    }
    SUBCASE("sigma 7 radius 21 sums to one") {
        const auto k = gaussian_kernel(7.0, 21);
        CHECK(k.side() == 43);
        CHECK(std::abs(std::accumulate(k.values.begin(), k.values.end(), 0.0) - 1.0) < 1e-12);
    }
    SUBCASE("sigma 1 radius 3 centre equals direct summation") {
        // 1 / sum over the 7x7 support of exp(-(i^2 + j^2) / 2)
        double s = 0.0;
        for (int i = -3; i <= 3; ++i)
            for (int j = -3; j <= 3; ++j) s += std::exp(-(i * i + j * j) / 2.0);
        const auto k = gaussian_kernel(1.0, 3);
        CHECK(k.at(0, 0) == doctest::Approx(1.0 / s).epsilon(1e-14));
        CHECK(k.at(0, 0) == doctest::Approx(0.15924112569070242).epsilon(1e-12));
    }
    SUBCASE("symmetric and peaked at the centre") {
        const auto k = gaussian_kernel(2.0, 6);
        for (int dy = -6; dy <= 6; ++dy)
            for (int dx = -6; dx <= 6; ++dx) {
                CHECK(k.at(dy, dx) == k.at(-dy, dx));
                CHECK(k.at(dy, dx) == k.at(dx, dy));
                CHECK(k.at(dy, dx) <= k.at(0, 0));
            }
    }
    CHECK(default_radius(7.0) == 21);
    CHECK_THROWS_AS(gaussian_kernel(0.0, 3), InvalidArgument);
    CHECK_THROWS_AS(gaussian_kernel(1.0, -1), InvalidArgument);
}

TEST_CASE("render_density") {
    SUBCASE("no dots gives an all-zero map") {
        const auto m = render_density(dots_of({}), 64, 64);
        CHECK(m.sum() == 0.0);
        CHECK(m.max() == 0.0);
    }
    SUBCASE("centre and corner dots carry unit mass") {
        CHECK(std::abs(render_density(dots_of({{32, 32}}), 64, 64).sum() - 1.0) < 1e-9);
        CHECK(std::abs(render_density(dots_of({{0, 0}}), 64, 64).sum() - 1.0) < 1e-9);
    }
    SUBCASE("corner dot equals the clipped, renormalized oracle") {
        // Before renormalization the clipped kernel keeps only about a quarter of its mass.
        const auto expected = oracle::single_dot_density(0.0, 0.0, 64, 64, 7.0);
        const auto m = render_density(dots_of({{0, 0}}), 64, 64);
        double max_diff = 0.0;
        for (std::size_t r = 0; r < 64; ++r)
            for (std::size_t c = 0; c < 64; ++c) max_diff = std::max(max_diff, std::abs(m.at(r, c) - expected[r][c]));
        CHECK(max_diff < 1e-15);
        const auto full = gaussian_kernel(7.0, 21);
        double kept = 0.0;
        for (int dy = 0; dy <= 21; ++dy)
            for (int dx = 0; dx <= 21; ++dx) kept += full.at(dy, dx);
        CHECK(m.at(0, 0) == doctest::Approx(full.at(0, 0) / kept).epsilon(1e-12));
    }
    SUBCASE("random maps match the per-dot oracle superposition") {
        Rng rng(5);
        for (int trial = 0; trial < 5; ++trial) {
            const auto d = random_dots(rng, 12, 40, 36);
            auto expected = oracle::zeros(40, 36);
            for (const auto& p : d.points) {
                const auto one = oracle::single_dot_density(p.x, p.y, 40, 36, 3.0);
                for (std::size_t r = 0; r < 40; ++r)
                    for (std::size_t c = 0; c < 36; ++c) expected[r][c] += one[r][c];
            }
            const auto m = render_density(d, 40, 36, 3.0);
            for (std::size_t r = 0; r < 40; ++r)
                for (std::size_t c = 0; c < 36; ++c) REQUIRE(std::abs(m.at(r, c) - expected[r][c]) < 1e-12);
        }
    }
    SUBCASE("mass is conserved for random annotations") {
        Rng rng(99);
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t n = rng.below(51);
            const auto m = render_density(random_dots(rng, n, 64, 64), 64, 64);
            REQUIRE(std::abs(m.sum() - double(n)) <= 1e-6 * std::max<double>(double(n), 1.0));
            REQUIRE(*std::min_element(m.values.begin(), m.values.end()) >= 0.0);
        }
    }
    SUBCASE("out-of-bounds dot names the point and image") {
        try {
            render_density(DotAnnotation{"img_0003", {{1, 1}, {70, 3}}}, 64, 64);
            FAIL("expected InvalidArgument");
        } catch (const InvalidArgument& e) {
            const std::string msg = e.what();
            CHECK(msg.find("img_0003") != std::string::npos);
            CHECK(msg.find("1") != std::string::npos);
        }
    }
}

TEST_CASE("downsample_sum") {
    DensityMap ones(4, 4);
    std::fill(ones.values.begin(), ones.values.end(), 1.0);
    const auto one = downsample_sum(ones, 4);
    REQUIRE(one.height == 1);
    CHECK(one.values[0] == 16.0);

    std::mt19937_64 gen(3);
    const auto g = oracle::random_grid(8, 8, gen);
    DensityMap m(8, 8);
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 8; ++c) m.at(r, c) = g[r][c];
    CHECK(downsample_sum(m, 1).values == m.values);
    const auto expected = oracle::block_sum(g, 2);
    const auto d = downsample_sum(m, 2);
    REQUIRE(d.height == 4);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) CHECK(d.at(r, c) == doctest::Approx(expected[r][c]).epsilon(1e-14));
    CHECK_THROWS_AS(downsample_sum(m, 3), InvalidArgument);
}

TEST_CASE("drop_annotations") {
    DotAnnotation ten{"x", {}};
    for (int i = 0; i < 10; ++i) ten.points.push_back({double(i), double(i)});
    CHECK(drop_annotations(ten, 0.0, 1).points == ten.points);
    CHECK(drop_annotations(ten, 0.3, 1).count() == 7);
    CHECK(drop_annotations(dots_of({{1, 1}}), 0.3, 1).count() == 1);
    CHECK(dropped_count(10, 0.7) == 7);  // floor(7.000000000000001) and floor(6.9999999) both land on 7
    CHECK(dropped_count(100, 0.29) == 29);
    CHECK(drop_annotations(ten, 1.0, 1).count() == 0);
    CHECK_THROWS_AS(drop_annotations(ten, 1.5, 1), InvalidArgument);
    CHECK_THROWS_AS(drop_annotations(ten, -0.1, 1), InvalidArgument);

    SUBCASE("survivors keep order, are a subset, and depend only on the seed") {
        Rng rng(8);
        for (int trial = 0; trial < 100; ++trial) {
            DotAnnotation d{"y", {}};
            const std::size_t n = 1 + rng.below(40);
            for (std::size_t i = 0; i < n; ++i) d.points.push_back({double(i), 0.0});
            const auto a = drop_annotations(d, 0.3, trial);
            const auto b = drop_annotations(d, 0.3, trial);
            REQUIRE(a.points == b.points);
            REQUIRE(a.count() == n - std::size_t(std::floor(0.3 * double(n) + 1e-9)));
            for (std::size_t i = 1; i < a.points.size(); ++i) REQUIRE(a.points[i - 1].x < a.points[i].x);
        }
    }
    CHECK(corruption_kind_from_string(to_string(CorruptionKind::missing)) == CorruptionKind::missing);
    CHECK_THROWS_AS(corruption_kind_from_string("noisy"), InvalidArgument);
}

TEST_CASE("generate_scene") {
    SceneConfig cfg;
    const auto a = generate_scene(cfg, 3);
    const auto b = generate_scene(cfg, 3);
    CHECK(a.image.values == b.image.values);
    CHECK(a.dots.points == b.dots.points);
    CHECK(a.dots.image_id == scene_id(3));
    CHECK(scene_id(7) == "img_0007");

    SceneConfig five = cfg;
    five.count_min = five.count_max = 5;
    CHECK(generate_scene(five, 0).dots.count() == 5);

    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        SceneConfig c = cfg;
        c.seed = seed;
        const auto s = generate_scene(c, seed % 13);
        REQUIRE(s.dots.count() >= c.count_min);
        REQUIRE(s.dots.count() <= c.count_max);
        for (const auto& p : s.dots.points) {
            REQUIRE(p.x >= 0.0);
            REQUIRE(p.y >= 0.0);
            REQUIRE(p.x <= double(c.width) - 1.0);
            REQUIRE(p.y <= double(c.height) - 1.0);
        }
        for (float v : s.image.values) REQUIRE((v >= 0.0f && v <= 1.0f));
    }

    SceneConfig crowded = cfg;
    crowded.count_max = 1000;
    CHECK_THROWS_AS(validate(crowded), InvalidArgument);
    SceneConfig backwards = cfg;
    backwards.count_min = 30;
    CHECK_THROWS_AS(validate(backwards), InvalidArgument);
}

TEST_CASE("heads are brighter than the background") {
    SceneConfig cfg;
    double on = 0.0, off = 0.0;
    std::size_t n_on = 0, n_off = 0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto s = generate_scene(cfg, i);
        const auto m = render_density(s.dots, cfg.height, cfg.width, 1.0);
        for (std::size_t k = 0; k < m.values.size(); ++k) {
            if (m.values[k] > 0.05) {
                on += s.image.values[k];
                ++n_on;
            } else if (m.values[k] < 1e-6) {
                off += s.image.values[k];
                ++n_off;
            }
        }
    }
    CHECK(on / double(n_on) > off / double(n_off) + 0.2);
}

TEST_CASE("formats round-trip") {
    const auto dir = oracle::scratch_dir("formats");
    GrayImage img(3, 5);
    for (std::size_t i = 0; i < img.values.size(); ++i) img.values[i] = float(i) / 14.0f;
    write_pgm(dir / "a.pgm", img);
    const auto back = read_pgm(dir / "a.pgm");
    REQUIRE(back.height == 3);
    REQUIRE(back.width == 5);
    for (std::size_t i = 0; i < img.values.size(); ++i) CHECK(std::abs(back.values[i] - img.values[i]) <= 0.5f / 255.0f + 1e-6f);
    const auto bytes = encode_pgm(img);
    CHECK(std::string(bytes.begin(), bytes.begin() + 2) == "P5");

    const DotAnnotation dots{"a", {{1.25, 2.5}, {0, 47}}};
    write_annotation(dir / "a.json", dots);
    CHECK(read_annotation(dir / "a.json", "a").points == dots.points);
    CHECK_THROWS_AS(decode_annotation("{\"x\": 1}", "a"), IoError);
    CHECK_THROWS_AS(decode_annotation("[[1, 2", "a"), IoError);

    DensityMap m(2, 3);
    m.values = {0.0, 0.5, 1.0, 0.25, 0.125, 2.0};
    write_density(dir / "a.dmap", m);
    const auto mb = read_density(dir / "a.dmap");
    CHECK(mb.values == m.values);
    auto raw = encode_density(m);
    raw.pop_back();
    CHECK_THROWS_AS(decode_density(raw, "cut"), IoError);
    raw = encode_density(m);
    raw[0] = 'X';
    CHECK_THROWS_AS(decode_density(raw, "bad"), IoError);
    CHECK_THROWS_AS(read_pgm(dir / "nope.pgm"), IoError);
}

TEST_CASE("generate_dataset") {
    const auto dir_a = oracle::scratch_dir("dataset_a");
    const auto dir_b = oracle::scratch_dir("dataset_b");
    SceneConfig cfg;
    const auto m = generate_dataset(cfg, 10, dir_a);
    generate_dataset(cfg, 10, dir_b);
    REQUIRE(m.images.size() == 10);
    const auto loaded = load_manifest(dir_a / "manifest.json");
    REQUIRE(loaded.images.size() == 10);
    CHECK(loaded.regime == "perfect");
    CHECK(loaded.stride == 4);
    for (const auto& e : loaded.images) {
        CHECK(std::filesystem::exists(e.image_path));
        CHECK(std::filesystem::exists(e.density_path));
        CHECK(std::filesystem::exists(e.density_q_path));
        const auto dots = read_annotation(e.annotation_path, e.id);
        CHECK(e.count == double(dots.count()));
        const auto q = read_density(e.density_q_path);
        CHECK(q.height == 12);
        CHECK(std::abs(q.sum() - e.count) < 1e-4);
        const auto rel = std::filesystem::relative(e.image_path, dir_a);
        CHECK(oracle::file_bytes(e.image_path) == oracle::file_bytes(dir_b / rel));
        CHECK(oracle::file_bytes(e.density_q_path) ==
              oracle::file_bytes(dir_b / std::filesystem::relative(e.density_q_path, dir_a)));
    }
    CHECK(oracle::file_bytes(dir_a / "manifest.json") == oracle::file_bytes(dir_b / "manifest.json"));
    CHECK_THROWS_AS(loaded.find("img_9999"), InvalidArgument);
    CHECK_THROWS_AS(load_manifest(dir_a / "missing.json"), IoError);
}
