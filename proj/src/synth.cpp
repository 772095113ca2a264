#include "dspm/synth.hpp"

#include <algorithm>
#include <cmath>

#include "dspm/error.hpp"
#include "dspm/rng.hpp"

namespace dspm {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint8_t clamp_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
}

void shuffle_ints(std::vector<int>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.uniform_below(i)]);
}

// Mid-gray sinusoidal stripes: period 8 px, amplitude 80, normal direction
// at `angle` radians, so the luminance gradient points along `angle`.
std::uint8_t stripe_value(double x, double y, double angle, double phase) {
    const double u = x * std::cos(angle) + y * std::sin(angle);
    return clamp_u8(128.0 + 80.0 * std::sin(2.0 * kPi / 8.0 * u + phase));
}

void fill_tiled(RgbImage& img, std::vector<std::int32_t>& labels, int grid,
                int tile, const std::vector<int>& tile_angle,
                const std::vector<double>& tile_phase, int orientations) {
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const int t = (y / tile) * grid + (x / tile);
            labels[static_cast<std::size_t>(y) * img.width + x] = t;
            const double angle = tile_angle[t] * kPi / orientations;
            const std::uint8_t v = stripe_value(x, y, angle, tile_phase[t]);
            img.at(x, y, 0) = v;
            img.at(x, y, 1) = v;
            img.at(x, y, 2) = v;
        }
    }
}

struct Color {
    double r, g, b;
};

void box_blur3(RgbImage& img) {
    const RgbImage src = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double sum = 0.0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int sx = std::clamp(x + dx, 0, img.width - 1);
                        const int sy = std::clamp(y + dy, 0, img.height - 1);
                        sum += src.at(sx, sy, c);
                    }
                }
                img.at(x, y, c) = clamp_u8(sum / 9.0);
            }
        }
    }
}

void add_gaussian(RgbImage& img, double sigma, Rng& rng) {
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = clamp_u8(img.pixels[i] + sigma * rng.normal());
}

// Smooth lattice noise: random values on a coarse grid, read back with
// bilinear interpolation. Summing a couple of octaves gives the kind of
// mid-frequency surface texture (fabric, fur, plaster) that makes every
// small pixel neighborhood statistically distinctive in photographs.
class LatticeNoise {
  public:
    LatticeNoise(int width, int height, double cell, Rng& rng) : cell_(cell) {
        gw_ = static_cast<int>(width / cell) + 2;
        gh_ = static_cast<int>(height / cell) + 2;
        values_.resize(static_cast<std::size_t>(gw_) * gh_);
        for (double& v : values_) v = rng.uniform(-1.0, 1.0);
    }

    double at(int x, int y) const {
        const double gx = x / cell_, gy = y / cell_;
        const int ix = static_cast<int>(gx), iy = static_cast<int>(gy);
        const double tx = gx - ix, ty = gy - iy;
        const double* row = values_.data() + static_cast<std::size_t>(iy) * gw_;
        const double top = row[ix] * (1 - tx) + row[ix + 1] * tx;
        const double bot = row[ix + gw_] * (1 - tx) + row[ix + gw_ + 1] * tx;
        return top * (1 - ty) + bot * ty;
    }

  private:
    int gw_, gh_;
    double cell_;
    std::vector<double> values_;
};

}  // namespace

TexturePair gen_textures(int size, std::uint64_t seed, int grid,
                         int orientations) {
    if (grid < 1 || orientations != grid * grid)
        fail(ErrorKind::BadParameter,
             "texture mosaic needs orientations == grid*grid");
    if (size < grid || size % grid != 0)
        fail(ErrorKind::BadParameter, "mosaic size must be a multiple of grid");
    const int tile = size / grid;
    Rng rng(seed);

    std::vector<int> order_a(orientations), order_b(orientations);
    for (int i = 0; i < orientations; ++i) order_a[i] = order_b[i] = i;
    shuffle_ints(order_a, rng);
    shuffle_ints(order_b, rng);
    std::vector<double> phase_a(orientations), phase_b(orientations);
    for (int i = 0; i < orientations; ++i) phase_a[i] = rng.uniform(0.0, 2.0 * kPi);
    for (int i = 0; i < orientations; ++i) phase_b[i] = rng.uniform(0.0, 2.0 * kPi);

    TexturePair out;
    out.image_a = RgbImage(size, size);
    out.image_b = RgbImage(size, size);
    out.angle_a = order_a;
    out.angle_b = order_b;
    std::vector<std::int32_t> labels_a(out.image_a.pixel_count());
    std::vector<std::int32_t> labels_b(out.image_b.pixel_count());
    fill_tiled(out.image_a, labels_a, grid, tile, order_a, phase_a, orientations);
    fill_tiled(out.image_b, labels_b, grid, tile, order_b, phase_b, orientations);
    out.tiles_a = build_decomposition(size, size, std::move(labels_a));
    out.tiles_b = build_decomposition(size, size, std::move(labels_b));
    return out;
}

RgbImage add_noise(const RgbImage& img, double variance, std::uint64_t seed) {
    if (variance < 0.0) fail(ErrorKind::BadParameter, "noise variance must be >= 0");
    if (variance == 0.0) return img;
    RgbImage out = img;
    Rng rng(seed);
    add_gaussian(out, std::sqrt(variance), rng);
    return out;
}

namespace {

int scaled_dim(int dim, double factor) {
    return std::max(1, static_cast<int>(std::lround(dim * factor)));
}

int source_index(int out_coord, double factor, int src_dim) {
    return std::min(static_cast<int>(out_coord / factor), src_dim - 1);
}

}  // namespace

RgbImage scale_image_nn(const RgbImage& img, double factor) {
    if (factor <= 0.0) fail(ErrorKind::BadParameter, "scale factor must be > 0");
    RgbImage out(scaled_dim(img.width, factor), scaled_dim(img.height, factor));
    for (int y = 0; y < out.height; ++y) {
        const int sy = source_index(y, factor, img.height);
        for (int x = 0; x < out.width; ++x) {
            const int sx = source_index(x, factor, img.width);
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(sx, sy, c);
        }
    }
    return out;
}

GrayImage16 scale_labels_nn(const GrayImage16& labels, double factor) {
    if (factor <= 0.0) fail(ErrorKind::BadParameter, "scale factor must be > 0");
    GrayImage16 out(scaled_dim(labels.width, factor), scaled_dim(labels.height, factor));
    for (int y = 0; y < out.height; ++y) {
        const int sy = source_index(y, factor, labels.height);
        for (int x = 0; x < out.width; ++x)
            out.at(x, y) = labels.at(source_index(x, factor, labels.width), sy);
    }
    return out;
}

ClassMap scale_class_map_nn(const ClassMap& m, double factor) {
    if (factor <= 0.0) fail(ErrorKind::BadParameter, "scale factor must be > 0");
    ClassMap out;
    out.width = scaled_dim(m.width, factor);
    out.height = scaled_dim(m.height, factor);
    out.num_classes = m.num_classes;
    out.classes.resize(static_cast<std::size_t>(out.width) * out.height);
    for (int y = 0; y < out.height; ++y) {
        const int sy = source_index(y, factor, m.height);
        for (int x = 0; x < out.width; ++x)
            out.classes[static_cast<std::size_t>(y) * out.width + x] =
                m.at(source_index(x, factor, m.width), sy);
    }
    return out;
}

Decomposition scale_decomposition_nn(const Decomposition& d, double factor) {
    if (factor <= 0.0) fail(ErrorKind::BadParameter, "scale factor must be > 0");
    const int w = scaled_dim(d.width, factor);
    const int h = scaled_dim(d.height, factor);
    std::vector<std::int32_t> labels(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const int sy = source_index(y, factor, d.height);
        for (int x = 0; x < w; ++x)
            labels[static_cast<std::size_t>(y) * w + x] =
                d.label_at(source_index(x, factor, d.width), sy);
    }
    // Downsampling can split thin regions; repair before rebuilding.
    return build_decomposition(w, h, enforce_connectivity(w, h, std::move(labels)));
}

std::vector<ScaledCopy> gen_scaled_library(
    const std::vector<const RgbImage*>& images,
    const std::vector<const Decomposition*>& decomps,
    const std::vector<double>& factors, std::uint64_t seed) {
    if (images.size() != decomps.size())
        fail(ErrorKind::BadParameter, "one decomposition per image required");
    if (factors.empty()) fail(ErrorKind::BadParameter, "need at least one factor");
    for (double f : factors)
        if (f <= 0.0) fail(ErrorKind::BadParameter, "scale factor must be > 0");
    Rng rng(seed);
    std::vector<ScaledCopy> out;
    out.reserve(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        const double f = factors[rng.uniform_below(factors.size())];
        out.push_back({scale_image_nn(*images[i], f),
                       scale_decomposition_nn(*decomps[i], f), f});
    }
    return out;
}

namespace {

enum class Shape { Disk, Square, Diamond };

bool inside_shape(Shape s, double dx, double dy, double radius) {
    switch (s) {
        case Shape::Disk:
            return dx * dx + dy * dy <= radius * radius;
        case Shape::Square:
            return std::max(std::abs(dx), std::abs(dy)) <= radius * 0.9;
        case Shape::Diamond:
            return std::abs(dx) + std::abs(dy) <= radius * 1.25;
    }
    return false;
}

}  // namespace

RgbImage gen_test_scene(int width, int height, std::uint64_t seed) {
    if (width < 64 || height < 64)
        fail(ErrorKind::BadParameter, "scene needs at least 64x64 pixels");
    Rng rng(seed);
    RgbImage img(width, height);

    // Soft background: bilinear blend of four corner colors plus a bank of
    // radial tints at mixed scales. The resulting low-frequency field makes
    // every background location color-distinctive, the way uneven lighting
    // and surface texture do in photographs.
    Color corners[4];
    for (Color& c : corners)
        c = {rng.uniform(60, 130), rng.uniform(60, 130), rng.uniform(60, 130)};
    struct Tint {
        double cx, cy, radius;
        Color delta;
    };
    std::vector<Tint> tints;
    for (int i = 0; i < 8; ++i)
        tints.push_back({rng.uniform(0, width), rng.uniform(0, height),
                         rng.uniform(0.12, 0.5) * std::min(width, height),
                         {rng.uniform(-35, 35), rng.uniform(-35, 35), rng.uniform(-35, 35)}});
    for (int y = 0; y < height; ++y) {
        const double ty = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
        for (int x = 0; x < width; ++x) {
            const double tx = width > 1 ? static_cast<double>(x) / (width - 1) : 0.0;
            double r = (corners[0].r * (1 - tx) + corners[1].r * tx) * (1 - ty) +
                       (corners[2].r * (1 - tx) + corners[3].r * tx) * ty;
            double g = (corners[0].g * (1 - tx) + corners[1].g * tx) * (1 - ty) +
                       (corners[2].g * (1 - tx) + corners[3].g * tx) * ty;
            double b = (corners[0].b * (1 - tx) + corners[1].b * tx) * (1 - ty) +
                       (corners[2].b * (1 - tx) + corners[3].b * tx) * ty;
            for (const Tint& tint : tints) {
                const double dx = x - tint.cx, dy = y - tint.cy;
                const double w = std::exp(-(dx * dx + dy * dy) / (tint.radius * tint.radius));
                r += tint.delta.r * w;
                g += tint.delta.g * w;
                b += tint.delta.b * w;
            }
            img.at(x, y, 0) = clamp_u8(r);
            img.at(x, y, 1) = clamp_u8(g);
            img.at(x, y, 2) = clamp_u8(b);
        }
    }

    // Twelve outlined objects on a jittered 4x3 cell grid. Only four fill
    // colors, so each color repeats on three objects that differ in shape
    // and stripe orientation — ambiguous by color, resolvable by contours.
    const Color palette[4] = {{196, 84, 70}, {84, 150, 196}, {196, 170, 80}, {96, 178, 110}};
    const int cols = 4, rows = 3;
    const double cell_w = static_cast<double>(width) / cols;
    const double cell_h = static_cast<double>(height) / rows;
    const double max_radius = 0.38 * std::min(cell_w, cell_h);
    for (int row = 0; row < rows; ++row) {
        for (int col = 0; col < cols; ++col) {
            // Base palette plus a per-object jitter: objects stay grouped in
            // four color families (contours must still disambiguate close
            // calls) but no two interiors are exact duplicates.
            Color fill = palette[(col + row) % 4];
            fill.r += rng.uniform(-26, 26);
            fill.g += rng.uniform(-26, 26);
            fill.b += rng.uniform(-26, 26);
            const Shape shape = static_cast<Shape>((col + 2 * row) % 3);
            const double radius = rng.uniform(0.7, 1.0) * max_radius;
            const double cx = (col + 0.5) * cell_w + rng.uniform(-0.2, 0.2) * cell_w;
            const double cy = (row + 0.5) * cell_h + rng.uniform(-0.2, 0.2) * cell_h;
            const double angle = rng.uniform_below(4) * (kPi / 4.0);
            const double phase = rng.uniform(0.0, 2.0 * kPi);
            // Per-object shading gradient: same-colored objects stay in one
            // color family but their interiors shade differently with
            // position, as lit surfaces do in photographs.
            const double shade_dir = rng.uniform(0.0, 2.0 * kPi);
            const double shade_amp = rng.uniform(22.0, 34.0);
            const double shade_dx = std::cos(shade_dir) / radius;
            const double shade_dy = std::sin(shade_dir) / radius;
            const int x0 = std::max(0, static_cast<int>(cx - radius - 3));
            const int x1 = std::min(width - 1, static_cast<int>(cx + radius + 3));
            const int y0 = std::max(0, static_cast<int>(cy - radius - 3));
            const int y1 = std::min(height - 1, static_cast<int>(cy + radius + 3));
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    const double dx = x - cx, dy = y - cy;
                    if (!inside_shape(shape, dx, dy, radius)) continue;
                    if (!inside_shape(shape, dx, dy, radius - 2.5)) {
                        img.at(x, y, 0) = 25;
                        img.at(x, y, 1) = 22;
                        img.at(x, y, 2) = 28;
                        continue;
                    }
                    const double u = dx * std::cos(angle) + dy * std::sin(angle);
                    // Stripe amplitude stays below one histogram bin so the
                    // texture reads through gradients (interface windows)
                    // without skewing region color statistics when superpixel
                    // boundaries settle along stripe ridges.
                    const double mod = 12.0 * std::sin(2.0 * kPi / 10.0 * u + phase);
                    const double shade = shade_amp * (dx * shade_dx + dy * shade_dy);
                    img.at(x, y, 0) = clamp_u8(fill.r + mod + shade);
                    img.at(x, y, 1) = clamp_u8(fill.g + mod + shade);
                    img.at(x, y, 2) = clamp_u8(fill.b + mod + shade);
                }
            }
        }
    }

    // Mid-frequency surface texture over the whole frame, background and
    // objects alike. Photographs are textured everywhere; this is what
    // makes two different oversegmentations of one image sample genuinely
    // different pixel sets wherever their boundaries disagree.
    // Amplitudes and cell sizes keep the texture's gradients well below a
    // contour edge's, so orientation statistics near outlines still read
    // the contour, while region color statistics become location-specific.
    {
        const LatticeNoise coarse(width, height, 12.0, rng);
        const LatticeNoise fine(width, height, 6.0, rng);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const double delta = 16.0 * coarse.at(x, y) + 4.0 * fine.at(x, y);
                for (int c = 0; c < 3; ++c)
                    img.at(x, y, c) = clamp_u8(img.at(x, y, c) + delta);
            }
        }
    }

    // A single blur pass antialiases contours without washing them out:
    // edges stay sharp enough that pixels straddling them carry mixed
    // colors, which is what border-offset statistics are meant to avoid.
    // The grain makes each pixel's exact value location-unique, so region
    // statistics disagree precisely where two decompositions disagree.
    box_blur3(img);
    add_gaussian(img, 6.0, rng);
    return img;
}

LabeledScene gen_labeled_scene(int width, int height, std::uint64_t seed) {
    if (width < 48 || height < 48)
        fail(ErrorKind::BadParameter, "scene needs at least 48x48 pixels");
    Rng rng(seed);
    LabeledScene out;
    out.image = RgbImage(width, height);
    out.classes.width = width;
    out.classes.height = height;
    out.classes.num_classes = 3;
    out.classes.classes.assign(static_cast<std::size_t>(width) * height, 0);

    // Background and hair share a palette neighborhood so that region color
    // alone cannot separate them reliably.
    const Color bg_palette[4] = {{92, 78, 64}, {70, 74, 88}, {106, 96, 82}, {58, 60, 58}};
    const int bg_pick = static_cast<int>(rng.uniform_below(4));
    const Color bg = bg_palette[bg_pick];
    const Color bg2 = {bg.r + rng.uniform(-18, 18), bg.g + rng.uniform(-18, 18),
                       bg.b + rng.uniform(-18, 18)};
    const int hair_pick = static_cast<int>(rng.uniform_below(4));
    const Color hair = {bg_palette[hair_pick].r + rng.uniform(-14, 14),
                        bg_palette[hair_pick].g + rng.uniform(-14, 14),
                        bg_palette[hair_pick].b + rng.uniform(-14, 14)};
    const Color skins[4] = {{224, 182, 150}, {198, 152, 118}, {164, 118, 88}, {120, 84, 62}};
    const Color skin = skins[rng.uniform_below(4)];
    const Color cloth = {rng.uniform(30, 200), rng.uniform(30, 200), rng.uniform(30, 200)};

    // Face geometry.
    const double cx = width * (0.5 + rng.uniform(-0.06, 0.06));
    const double cy = height * (0.52 + rng.uniform(-0.05, 0.05));
    const double rx = width * rng.uniform(0.17, 0.23);
    const double ry = rx * rng.uniform(1.25, 1.45);
    const double hair_scale = rng.uniform(1.22, 1.42);
    const double hair_top = cy + 0.18 * ry;  // hair only above this line

    auto in_ellipse = [](double dx, double dy, double ax, double ay) {
        const double u = dx / ax, v = dy / ay;
        return u * u + v * v <= 1.0;
    };

    for (int y = 0; y < height; ++y) {
        const double t = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
        for (int x = 0; x < width; ++x) {
            const double dx = x - cx, dy = y - cy;
            Color c = {bg.r + (bg2.r - bg.r) * t, bg.g + (bg2.g - bg.g) * t,
                       bg.b + (bg2.b - bg.b) * t};
            int cls = 0;

            // Shoulders: background class with clothing appearance.
            const double sy = y - (cy + ry * 1.15);
            if (sy > 0 && std::abs(dx) < rx * 2.1 - sy * 0.25) {
                c = cloth;
                const double u = 0.08 * dx + 0.2 * sy;
                const double mod = 18.0 * std::sin(2.0 * kPi / 12.0 * u);
                c = {c.r + mod, c.g + mod, c.b + mod};
            }
            if (y < hair_top && in_ellipse(dx, dy, rx * hair_scale, ry * hair_scale)) {
                c = hair;
                // Strand-like vertical streaks.
                c.r += 12.0 * std::sin(0.9 * x + 0.15 * y);
                c.g += 12.0 * std::sin(0.9 * x + 0.15 * y);
                c.b += 12.0 * std::sin(0.9 * x + 0.15 * y);
                cls = 2;
            }
            if (in_ellipse(dx, dy, rx, ry)) {
                const double shade = 1.0 - 0.18 * (dx / rx) * (dx / rx) - 0.10 * (dy / ry);
                c = {skin.r * shade, skin.g * shade, skin.b * shade};
                // Eyes and mouth darken the skin but stay in the skin class.
                const double er = rx * 0.13;
                const bool eye =
                    in_ellipse(dx - rx * 0.42, dy + ry * 0.18, er, er * 0.7) ||
                    in_ellipse(dx + rx * 0.42, dy + ry * 0.18, er, er * 0.7);
                const bool mouth = in_ellipse(dx, dy - ry * 0.48, rx * 0.34, ry * 0.08);
                if (eye) c = {40, 34, 32};
                if (mouth) c = {150 * shade, 62 * shade, 66 * shade};
                cls = 1;
            }
            out.image.at(x, y, 0) = clamp_u8(c.r);
            out.image.at(x, y, 1) = clamp_u8(c.g);
            out.image.at(x, y, 2) = clamp_u8(c.b);
            out.classes.classes[static_cast<std::size_t>(y) * width + x] = cls;
        }
    }

    box_blur3(out.image);
    add_gaussian(out.image, 2.0, rng);
    return out;
}

}  // namespace dspm
