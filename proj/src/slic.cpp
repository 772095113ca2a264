#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "dspm/decomp.hpp"
#include "dspm/error.hpp"
#include "dspm/rng.hpp"

namespace dspm {

namespace {

struct Lab {
    double l, a, b;
};

// sRGB (8-bit, D65) to CIELAB.
Lab rgb_to_lab(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    auto linearize = [](double s) {
        return s <= 0.04045 ? s / 12.92 : std::pow((s + 0.055) / 1.055, 2.4);
    };
    const double r = linearize(r8 / 255.0);
    const double g = linearize(g8 / 255.0);
    const double b = linearize(b8 / 255.0);
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    auto f = [](double t) {
        constexpr double kCube = 216.0 / 24389.0;  // (6/29)^3
        return t > kCube ? std::cbrt(t) : t * (841.0 / 108.0) + 4.0 / 29.0;
    };
    const double fx = f(x / 0.95047);
    const double fy = f(y);
    const double fz = f(z / 1.08883);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

struct Center {
    double l, a, b, x, y;
};

}  // namespace

Decomposition generate_slic(const RgbImage& image, int k_target, double compactness,
                            std::uint64_t seed, int iterations) {
    const int width = image.width;
    const int height = image.height;
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (k_target < 1 || static_cast<std::size_t>(k_target) > n)
        fail(ErrorKind::BadParameter,
             "superpixel count must be between 1 and the pixel count");
    if (compactness <= 0.0)
        fail(ErrorKind::BadParameter, "compactness must be positive");
    if (iterations < 1)
        fail(ErrorKind::BadParameter, "need at least one assignment iteration");

    std::vector<Lab> lab(n);
    for (std::size_t p = 0; p < n; ++p)
        lab[p] = rgb_to_lab(image.pixels[3 * p], image.pixels[3 * p + 1],
                            image.pixels[3 * p + 2]);

    const double spacing = std::sqrt(static_cast<double>(n) / k_target);
    const int grid_w = std::max(1, static_cast<int>(std::lround(width / spacing)));
    const int grid_h = std::max(1, static_cast<int>(std::lround(height / spacing)));
    const int k = grid_w * grid_h;

    // Grid seeds with a small seeded jitter so regular image structure
    // cannot lock every run to the same degenerate layout.
    Rng rng(seed);
    std::vector<Center> centers;
    centers.reserve(static_cast<std::size_t>(k));
    const double step_x = static_cast<double>(width) / grid_w;
    const double step_y = static_cast<double>(height) / grid_h;
    for (int gy = 0; gy < grid_h; ++gy) {
        for (int gx = 0; gx < grid_w; ++gx) {
            double cx = (gx + 0.5) * step_x + rng.uniform(-spacing / 4.0, spacing / 4.0);
            double cy = (gy + 0.5) * step_y + rng.uniform(-spacing / 4.0, spacing / 4.0);
            cx = std::clamp(cx, 0.0, width - 1.0);
            cy = std::clamp(cy, 0.0, height - 1.0);
            const int px = static_cast<int>(std::lround(cx));
            const int py = static_cast<int>(std::lround(cy));
            const Lab& c = lab[static_cast<std::size_t>(py) * width + px];
            centers.push_back({c.l, c.a, c.b, cx, cy});
        }
    }

    const double inv_s2 = (compactness * compactness) / (spacing * spacing);
    std::vector<std::int32_t> assign(n, -1);
    std::vector<double> best(n);

    for (int iter = 0; iter < iterations; ++iter) {
        std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
        std::fill(assign.begin(), assign.end(), -1);
        for (std::int32_t c = 0; c < k; ++c) {
            const Center& ctr = centers[c];
            const int x0 = std::max(0, static_cast<int>(std::floor(ctr.x - 2 * spacing)));
            const int x1 = std::min(width - 1, static_cast<int>(std::ceil(ctr.x + 2 * spacing)));
            const int y0 = std::max(0, static_cast<int>(std::floor(ctr.y - 2 * spacing)));
            const int y1 = std::min(height - 1, static_cast<int>(std::ceil(ctr.y + 2 * spacing)));
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const std::size_t p = static_cast<std::size_t>(y) * width + x;
                    const Lab& v = lab[p];
                    const double dl = v.l - ctr.l;
                    const double da = v.a - ctr.a;
                    const double db = v.b - ctr.b;
                    const double dx = x - ctr.x;
                    const double dy = y - ctr.y;
                    const double d =
                        dl * dl + da * da + db * db + inv_s2 * (dx * dx + dy * dy);
                    if (d < best[p]) {
                        best[p] = d;
                        assign[p] = c;
                    }
                }
            }
        }
        // Pixels outside every search window fall back to the spatially
        // nearest center.
        for (std::size_t p = 0; p < n; ++p) {
            if (assign[p] != -1) continue;
            const double x = static_cast<double>(p % width);
            const double y = static_cast<double>(p / width);
            double bd = std::numeric_limits<double>::infinity();
            for (std::int32_t c = 0; c < k; ++c) {
                const double dx = x - centers[c].x;
                const double dy = y - centers[c].y;
                const double d = dx * dx + dy * dy;
                if (d < bd) {
                    bd = d;
                    assign[p] = c;
                }
            }
        }
        // Move each center to the mean of its cluster.
        std::vector<Center> sums(static_cast<std::size_t>(k), {0, 0, 0, 0, 0});
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t p = 0; p < n; ++p) {
            const std::int32_t c = assign[p];
            const Lab& v = lab[p];
            sums[c].l += v.l;
            sums[c].a += v.a;
            sums[c].b += v.b;
            sums[c].x += static_cast<double>(p % width);
            sums[c].y += static_cast<double>(p / width);
            ++counts[c];
        }
        for (std::int32_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // keep stale center
            const double inv = 1.0 / counts[c];
            centers[c] = {sums[c].l * inv, sums[c].a * inv, sums[c].b * inv,
                          sums[c].x * inv, sums[c].y * inv};
        }
    }

    std::vector<std::int32_t> repaired = enforce_connectivity(width, height, std::move(assign));
    return build_decomposition(width, height, std::move(repaired));
}

}  // namespace dspm
