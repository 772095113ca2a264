#include <doctest.h>

#include <cstdint>
#include <vector>

#include "dspm/decomp.hpp"
#include "dspm/error.hpp"
#include "dspm/viz.hpp"

using namespace dspm;

namespace {

// 4x2 map split into a left and a right superpixel, barycenters
// (0.5, 0.5) and (2.5, 0.5).
Decomposition split_decomp() {
    const std::vector<std::int32_t> labels = {0, 0, 1, 1,
                                              0, 0, 1, 1};
    return build_decomposition(4, 2, labels);
}

bool is_white(const RgbImage& img, int x, int y) {
    return img.at(x, y, 0) == 255 && img.at(x, y, 1) == 255 && img.at(x, y, 2) == 255;
}

bool is_black(const RgbImage& img, int x, int y) {
    return img.at(x, y, 0) == 0 && img.at(x, y, 1) == 0 && img.at(x, y, 2) == 0;
}

}  // namespace

TEST_SUITE("viz") {

TEST_CASE("zero displacement renders white") {
    std::uint8_t rgb[3];
    flow_color(0.0, 0.0, 10.0, rgb);
    CHECK(rgb[0] == 255);
    CHECK(rgb[1] == 255);
    CHECK(rgb[2] == 255);
    // Degenerate maximum: everything is treated as zero magnitude.
    flow_color(3.0, -4.0, 0.0, rgb);
    CHECK(rgb[0] == 255);
    CHECK(rgb[1] == 255);
    CHECK(rgb[2] == 255);
}

TEST_CASE("saturated displacements are colored by direction") {
    std::uint8_t east[3], west[3], north[3];
    flow_color(5.0, 0.0, 5.0, east);
    flow_color(-5.0, 0.0, 5.0, west);
    flow_color(0.0, -5.0, 5.0, north);
    // Fully saturated: not white.
    CHECK(!(east[0] == 255 && east[1] == 255 && east[2] == 255));
    // Distinct directions map to distinct hues.
    const bool east_west_differ =
        east[0] != west[0] || east[1] != west[1] || east[2] != west[2];
    const bool east_north_differ =
        east[0] != north[0] || east[1] != north[1] || east[2] != north[2];
    CHECK(east_west_differ);
    CHECK(east_north_differ);
    // Halfway magnitude sits between white and the saturated color.
    std::uint8_t half[3];
    flow_color(2.5, 0.0, 5.0, half);
    for (int c = 0; c < 3; ++c) CHECK(half[c] >= east[c]);
    CHECK((half[0] + half[1] + half[2]) > (east[0] + east[1] + east[2]));
}

TEST_CASE("displacement maps paint matched superpixels and leave the rest black") {
    const Decomposition d = split_decomp();
    // Identity match for the left superpixel only: zero displacement -> white.
    const std::vector<MatchRecord> matches = {{0, 0, 0, 0, 50.0, 0.1}};
    const RgbImage img = render_displacement(d, matches, {&d});
    for (int y = 0; y < 2; ++y) {
        for (int x = 0; x < 4; ++x) {
            if (x < 2)
                CHECK(is_white(img, x, y));
            else
                CHECK(is_black(img, x, y));
        }
    }
}

TEST_CASE("among several records the lowest distance decides the displacement") {
    const Decomposition d = split_decomp();
    // Run 0 points at the identity (distance 0.5); run 1 found a better match
    // across the image (distance 0.1, displacement (2, 0)).
    std::vector<MatchRecord> matches = {{0, 0, 0, 0, 50.0, 0.5},
                                        {0, 1, 0, 1, 50.0, 0.1}};
    const RgbImage a = render_displacement(d, matches, {&d});
    CHECK(!is_white(a, 0, 0));
    CHECK(!is_black(a, 0, 0));
    // Record order must not matter.
    std::swap(matches[0], matches[1]);
    const RgbImage b = render_displacement(d, matches, {&d});
    CHECK(a.pixels == b.pixels);
}

TEST_CASE("displacement rendering validates match indices") {
    const Decomposition d = split_decomp();
    CHECK_THROWS_AS(render_displacement(d, {{7, 0, 0, 0, 50.0, 0.1}}, {&d}), Error);
    CHECK_THROWS_AS(render_displacement(d, {{0, 0, 2, 0, 50.0, 0.1}}, {&d}), Error);
    CHECK_THROWS_AS(render_displacement(d, {{0, 0, 0, 9, 50.0, 0.1}}, {&d}), Error);
}

TEST_CASE("class palette cycles every twelve entries") {
    std::uint8_t a[3], b[3], c[3];
    class_color(0, a);
    class_color(12, b);
    class_color(-12, c);
    CHECK((a[0] == b[0] && a[1] == b[1] && a[2] == b[2]));
    CHECK((a[0] == c[0] && a[1] == c[1] && a[2] == c[2]));
    // All twelve palette entries are distinct.
    for (int i = 0; i < 12; ++i) {
        class_color(i, a);
        for (int j = i + 1; j < 12; ++j) {
            class_color(j, b);
            CHECK((a[0] != b[0] || a[1] != b[1] || a[2] != b[2]));
        }
    }
}

TEST_CASE("label overlays blend, darken boundaries, and stamp the annotation") {
    // Uniform gray so expected blends are exact. 40x30 split into left/right
    // halves at x = 20.
    const int w = 40, h = 30;
    std::vector<std::int32_t> labels(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) labels[y * w + x] = x < 20 ? 0 : 1;
    const Decomposition d = build_decomposition(w, h, labels);
    RgbImage gray(w, h);
    std::fill(gray.pixels.begin(), gray.pixels.end(), std::uint8_t{200});

    const RgbImage out = render_label_overlay(gray, d, {0, 0}, "1");

    // Interior pixel far from box and boundary: 50/50 blend of gray 200 and
    // palette color 0 = (230, 60, 60).
    CHECK(out.at(30, 20, 0) == 215);
    CHECK(out.at(30, 20, 1) == 130);
    CHECK(out.at(30, 20, 2) == 130);
    // Boundary column (label changes between x=19 and x=20): blend * 0.35.
    CHECK(out.at(19, 20, 0) == 75);   // round(215 * 0.35) = round(75.25)
    CHECK(out.at(19, 20, 1) == 46);   // round(130 * 0.35) = round(45.5)
    CHECK(out.at(19, 20, 2) == 46);
    // Backing box pixel outside any glyph: blend / 4 (integer).
    CHECK(out.at(2, 2, 0) == 215 / 4);
    CHECK(out.at(2, 2, 1) == 130 / 4);
    // Glyph "1" row 0 lights only column 2, doubled to pixels (8..9, 4..5).
    CHECK(is_white(out, 8, 4));
    CHECK(is_white(out, 9, 5));
}

TEST_CASE("label overlays validate their inputs") {
    const Decomposition d = split_decomp();
    RgbImage wrong(3, 2);
    CHECK_THROWS_AS(render_label_overlay(wrong, d, {0, 1}, ""), Error);
    RgbImage right(4, 2);
    CHECK_THROWS_AS(render_label_overlay(right, d, {0}, ""), Error);
    CHECK_NOTHROW(render_label_overlay(right, d, {0, 1}, "0.5%"));
}

}  // TEST_SUITE
