#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "dspm/decomp.hpp"
#include "dspm/error.hpp"

using namespace dspm;

namespace {

// Block-grid decomposition: cells x cells square superpixels of side `side`.
Decomposition make_grid(int cells, int side) {
    const int dim = cells * side;
    std::vector<std::int32_t> labels(static_cast<std::size_t>(dim) * dim);
    for (int y = 0; y < dim; ++y)
        for (int x = 0; x < dim; ++x)
            labels[static_cast<std::size_t>(y) * dim + x] = (y / side) * cells + x / side;
    return build_decomposition(dim, dim, std::move(labels));
}

RgbImage flat_image(int w, int h, std::uint8_t v) {
    RgbImage img(w, h);
    std::fill(img.pixels.begin(), img.pixels.end(), v);
    return img;
}

}  // namespace

TEST_SUITE("decomp") {

TEST_CASE("single-superpixel 2x2 map") {
    const Decomposition d = build_decomposition(2, 2, {0, 0, 0, 0});
    CHECK(d.k == 1);
    CHECK(d.barycenters[0].x == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(d.barycenters[0].y == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(d.adjacency[0].empty());
    CHECK(d.members[0].size() == 4);
    CHECK_FALSE(d.remapped);
}

TEST_CASE("two-pixel map has mutual adjacency") {
    const Decomposition d = build_decomposition(2, 1, {0, 1});
    REQUIRE(d.k == 2);
    CHECK(d.adjacency[0] == std::vector<std::int32_t>{1});
    CHECK(d.adjacency[1] == std::vector<std::int32_t>{0});
}

TEST_CASE("member lists partition the image in raster order") {
    const Decomposition d = make_grid(3, 4);  // 12x12, 9 superpixels
    std::size_t total = 0;
    for (std::int32_t id = 0; id < d.k; ++id) {
        const auto& m = d.members[id];
        total += m.size();
        CHECK(std::is_sorted(m.begin(), m.end()));
        for (std::int32_t px : m) CHECK(d.labels[px] == id);
        // Barycenter is the arithmetic mean of member coordinates.
        double sx = 0.0, sy = 0.0;
        for (std::int32_t px : m) {
            sx += px % d.width;
            sy += px / d.width;
        }
        CHECK(d.barycenters[id].x == doctest::Approx(sx / m.size()).epsilon(1e-9));
        CHECK(d.barycenters[id].y == doctest::Approx(sy / m.size()).epsilon(1e-9));
    }
    CHECK(total == d.pixel_count());
}

TEST_CASE("adjacency is symmetric, sorted, and 4-connected only") {
    const Decomposition d = make_grid(3, 2);
    for (std::int32_t i = 0; i < d.k; ++i) {
        CHECK(std::is_sorted(d.adjacency[i].begin(), d.adjacency[i].end()));
        for (std::int32_t j : d.adjacency[i]) {
            const auto& back = d.adjacency[j];
            CHECK(std::find(back.begin(), back.end(), i) != back.end());
        }
    }
    // Center cell of a 3x3 grid touches exactly its 4 edge neighbors,
    // never the diagonal ones.
    CHECK(d.adjacency[4] == std::vector<std::int32_t>{1, 3, 5, 7});
}

TEST_CASE("gapped label ids are compacted and flagged") {
    const Decomposition d = build_decomposition(2, 1, {0, 5});
    CHECK(d.k == 2);
    CHECK(d.remapped);
    CHECK(d.labels == std::vector<std::int32_t>{0, 1});
}

TEST_CASE("malformed label maps are rejected") {
    CHECK_THROWS_AS(build_decomposition(2, 2, {0, 0, 0}), Error);        // size mismatch
    CHECK_THROWS_AS(build_decomposition(2, 1, {0, -1}), Error);          // negative id
    CHECK_THROWS_AS(build_decomposition(0, 4, {}), Error);               // empty
    // Diagonal pixels of one id are not 4-connected.
    try {
        build_decomposition(2, 2, {0, 1, 1, 0});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::FormatViolation);
        CHECK(std::string(e.what()).find("not 4-connected") != std::string::npos);
    }
}

TEST_CASE("superpixel_at clamps out-of-bounds probes") {
    const Decomposition d = make_grid(2, 3);  // 6x6, 4 superpixels
    CHECK(d.superpixel_at(-5.0, -5.0) == d.label_at(0, 0));
    CHECK(d.superpixel_at(d.width + 10.0, 3.2) == d.label_at(d.width - 1, 3));
    CHECK(d.superpixel_at(2.0, d.height + 100.0) == d.label_at(2, d.height - 1));
}

TEST_CASE("superpixel_at rounds half away from zero") {
    const Decomposition d = build_decomposition(4, 1, {0, 0, 1, 1});
    CHECK(d.superpixel_at(1.5, 0.0) == 1);   // 1.5 -> pixel 2
    CHECK(d.superpixel_at(1.49, 0.0) == 0);
    CHECK(d.superpixel_at(-0.5, 0.0) == 0);  // -0.5 -> -1 -> clamped to 0
}

TEST_CASE("superpixel_at returns the id at a convex region's barycenter") {
    const Decomposition d = make_grid(3, 5);
    for (std::int32_t id = 0; id < d.k; ++id)
        CHECK(d.superpixel_at(d.barycenters[id].x, d.barycenters[id].y) == id);
}

TEST_CASE("spacing statistics follow sqrt(|I|/K)") {
    const Decomposition d = make_grid(5, 20);  // 100x100, K=25
    CHECK(d.mean_spacing() == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(d.sigma1() == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("label map round trip preserves ids") {
    const Decomposition d = make_grid(4, 3);
    const GrayImage16 map = to_label_map(d);
    REQUIRE(map.width == d.width);
    REQUIRE(map.height == d.height);
    const Decomposition back = build_decomposition(
        map.width, map.height,
        std::vector<std::int32_t>(map.pixels.begin(), map.pixels.end()));
    CHECK(back.labels == d.labels);
    CHECK(back.k == d.k);
}

TEST_CASE("enforce_connectivity merges stray islands") {
    // Label 1 appears as two separated pixels inside a field of 0.
    std::vector<std::int32_t> labels(25, 0);
    labels[6] = 1;   // (1,1)
    labels[18] = 1;  // (3,3)
    const auto repaired = enforce_connectivity(5, 5, labels);
    const Decomposition d = build_decomposition(5, 5, repaired);
    for (std::int32_t id = 0; id < d.k; ++id) CHECK_FALSE(d.members[id].empty());
    // Idempotent once connected.
    CHECK(enforce_connectivity(5, 5, repaired) == repaired);
}

TEST_CASE("slic on a uniform image yields near-square regions") {
    const RgbImage img = flat_image(100, 100, 128);
    const Decomposition d = generate_slic(img, 25);
    CHECK(d.k == 25);
    std::vector<std::size_t> sizes;
    for (const auto& m : d.members) sizes.push_back(m.size());
    const double mean = 10000.0 / d.k;
    const auto [mn, mx] = std::minmax_element(sizes.begin(), sizes.end());
    CHECK(static_cast<double>(*mx - *mn) < 0.5 * mean);
}

TEST_CASE("slic is deterministic per seed") {
    RgbImage img(60, 40);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 60; ++x) {
            img.at(x, y, 0) = static_cast<std::uint8_t>((x * 4) & 0xff);
            img.at(x, y, 1) = static_cast<std::uint8_t>((y * 6) & 0xff);
            img.at(x, y, 2) = static_cast<std::uint8_t>((x + y) & 0xff);
        }
    const Decomposition a = generate_slic(img, 24, 10.0, 7, 10);
    const Decomposition b = generate_slic(img, 24, 10.0, 7, 10);
    CHECK(a.labels == b.labels);
    CHECK(a.k == b.k);
}

TEST_CASE("slic degenerate and invalid inputs") {
    const Decomposition d = generate_slic(flat_image(1, 1, 7), 1);
    CHECK(d.k == 1);
    CHECK_THROWS_AS(generate_slic(flat_image(4, 4, 0), 0), Error);
    CHECK_THROWS_AS(generate_slic(flat_image(4, 4, 0), 17), Error);   // k > |I|
    CHECK_THROWS_AS(generate_slic(flat_image(4, 4, 0), 4, 0.0), Error);
    CHECK_THROWS_AS(generate_slic(flat_image(4, 4, 0), 4, 10.0, 0, 0), Error);
}

TEST_CASE("slic output satisfies all decomposition invariants") {
    RgbImage img(80, 50);
    for (int y = 0; y < 50; ++y)
        for (int x = 0; x < 80; ++x) {
            img.at(x, y, 0) = static_cast<std::uint8_t>(x * 3);
            img.at(x, y, 1) = static_cast<std::uint8_t>(y * 5);
            img.at(x, y, 2) = 90;
        }
    const Decomposition d = generate_slic(img, 40, 10.0, 3);
    // Rebuilding from the raw labels must succeed (connectivity) and agree.
    const Decomposition rebuilt = build_decomposition(d.width, d.height, d.labels);
    CHECK(rebuilt.k == d.k);
    for (std::int32_t id = 0; id < d.k; ++id) {
        CHECK(rebuilt.barycenters[id].x == doctest::Approx(d.barycenters[id].x).epsilon(1e-9));
        CHECK(rebuilt.barycenters[id].y == doctest::Approx(d.barycenters[id].y).epsilon(1e-9));
        CHECK(rebuilt.adjacency[id] == d.adjacency[id]);
    }
}

}  // TEST_SUITE
