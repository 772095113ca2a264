#include "dspm/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "dspm/error.hpp"

namespace dspm {

std::vector<std::int32_t> erode_region(const Decomposition& d, std::int32_t id,
                                       int beta, bool* fallback) {
    if (id < 0 || id >= d.k) fail(ErrorKind::BadParameter, "superpixel id out of range");
    if (beta < 0) fail(ErrorKind::BadParameter, "erosion offset must be >= 0");
    if (fallback) *fallback = false;
    const std::vector<std::int32_t>& members = d.members[id];
    if (beta == 0) return members;

    int x0 = d.width, y0 = d.height, x1 = -1, y1 = -1;
    for (std::int32_t p : members) {
        const int x = p % d.width, y = p / d.width;
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    const int bw = x1 - x0 + 1, bh = y1 - y0 + 1;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(bw) * bh, 0);
    for (std::int32_t p : members)
        mask[static_cast<std::size_t>(p / d.width - y0) * bw + (p % d.width - x0)] = 1;

    // One pass removes pixels with a 4-neighbor outside the region;
    // beta passes leave exactly the pixels at city-block distance > beta
    // from any differently-labeled pixel. The 4-connected ring is the
    // mildest offset that still discards every pixel touching a border
    // edge-on, so the trimmed region keeps almost all of its interior
    // even for thin or ragged shapes. Off-image neighbors are ignored:
    // the picture border is not a region boundary.
    static constexpr int kNeighborX[4] = {1, -1, 0, 0};
    static constexpr int kNeighborY[4] = {0, 0, 1, -1};
    std::vector<std::uint8_t> next(mask.size());
    for (int pass = 0; pass < beta; ++pass) {
        bool any = false;
        for (int by = 0; by < bh; ++by) {
            for (int bx = 0; bx < bw; ++bx) {
                const std::size_t q = static_cast<std::size_t>(by) * bw + bx;
                if (!mask[q]) {
                    next[q] = 0;
                    continue;
                }
                bool keep = true;
                for (int n = 0; n < 4; ++n) {
                    const int ix = x0 + bx + kNeighborX[n];
                    const int iy = y0 + by + kNeighborY[n];
                    if (ix < 0 || ix >= d.width || iy < 0 || iy >= d.height) continue;
                    if (ix < x0 || ix > x1 || iy < y0 || iy > y1 ||
                        !mask[static_cast<std::size_t>(iy - y0) * bw + (ix - x0)]) {
                        keep = false;
                        break;
                    }
                }
                next[q] = keep ? 1 : 0;
                any = any || keep;
            }
        }
        mask.swap(next);
        if (!any) break;
    }

    std::vector<std::int32_t> out;
    for (int by = 0; by < bh; ++by)
        for (int bx = 0; bx < bw; ++bx)
            if (mask[static_cast<std::size_t>(by) * bw + bx])
                out.push_back((y0 + by) * d.width + (x0 + bx));
    if (out.empty()) {
        if (fallback) *fallback = true;
        return members;
    }
    return out;
}

namespace {

// Luminance with coordinates clamped into the image (border replication).
double lum_at(const RgbImage& img, int x, int y) {
    x = std::clamp(x, 0, img.width - 1);
    y = std::clamp(y, 0, img.height - 1);
    const std::size_t p = (static_cast<std::size_t>(y) * img.width + x) * 3;
    return luminance(img.pixels[p], img.pixels[p + 1], img.pixels[p + 2]);
}

// Accumulate one pixel's gradient into an unsigned-orientation histogram.
// The orientation is assigned softly to the two nearest bins (centers at
// i * 180/bins) so that nearby angles produce nearby histograms.
void hog_accumulate(const RgbImage& img, int x, int y, std::vector<double>& hist) {
    const int bins = static_cast<int>(hist.size());
    const double gx = 0.5 * (lum_at(img, x + 1, y) - lum_at(img, x - 1, y));
    const double gy = 0.5 * (lum_at(img, x, y + 1) - lum_at(img, x, y - 1));
    const double mag = std::hypot(gx, gy);
    if (mag == 0.0) return;
    double angle = std::atan2(gy, gx) * 180.0 / M_PI;  // (-180, 180]
    angle = std::fmod(angle + 360.0, 180.0);           // unsigned, [0, 180)
    const double step = 180.0 / bins;
    const double pos = angle / step;
    const int lo = static_cast<int>(pos) % bins;
    const double frac = pos - std::floor(pos);
    hist[lo] += mag * (1.0 - frac);
    hist[(lo + 1) % bins] += mag * frac;
}

std::vector<double> hog_normalize(std::vector<double> hist) {
    double norm = 0.0;
    for (double v : hist) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 1e-9) {
        for (double& v : hist) v /= norm;
    } else {
        std::fill(hist.begin(), hist.end(), 0.0);
    }
    return hist;
}

}  // namespace

std::vector<double> region_feature(const RgbImage& image,
                                   const std::vector<std::int32_t>& pixels,
                                   RegionFeatureKind kind, int hog_bins) {
    if (pixels.empty()) fail(ErrorKind::BadParameter, "region feature of an empty pixel list");
    switch (kind) {
        case RegionFeatureKind::MeanRgb: {
            std::vector<double> out(3, 0.0);
            for (std::int32_t p : pixels)
                for (int c = 0; c < 3; ++c)
                    out[c] += image.pixels[static_cast<std::size_t>(p) * 3 + c];
            for (double& v : out) v /= static_cast<double>(pixels.size());
            return out;
        }
        case RegionFeatureKind::CumulativeRgbHist9: {
            std::vector<double> out(27, 0.0);
            for (std::int32_t p : pixels)
                for (int c = 0; c < 3; ++c)
                    out[c * 9 + image.pixels[static_cast<std::size_t>(p) * 3 + c] * 9 / 256] += 1.0;
            for (double& v : out) v /= static_cast<double>(pixels.size());
            for (int c = 0; c < 3; ++c)
                for (int i = 1; i < 9; ++i) out[c * 9 + i] += out[c * 9 + i - 1];
            return out;
        }
        case RegionFeatureKind::Hog: {
            std::vector<double> hist(static_cast<std::size_t>(hog_bins), 0.0);
            for (std::int32_t p : pixels)
                hog_accumulate(image, p % image.width, p / image.width, hist);
            return hog_normalize(std::move(hist));
        }
    }
    fail(ErrorKind::BadParameter, "unknown region feature kind");
}

std::vector<Vec2> detect_interfaces(const Decomposition& d, int min_spacing) {
    if (min_spacing < 1) fail(ErrorKind::BadParameter, "interface spacing must be >= 1");
    std::vector<Vec2> out;
    for (int y = 0; y < d.height; ++y) {
        for (int x = 0; x < d.width; ++x) {
            // Count distinct labels in the clamped 3x3 neighborhood.
            std::int32_t seen[9];
            int n_seen = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int ix = x + dx, iy = y + dy;
                    if (ix < 0 || ix >= d.width || iy < 0 || iy >= d.height) continue;
                    const std::int32_t lab = d.label_at(ix, iy);
                    bool known = false;
                    for (int i = 0; i < n_seen; ++i)
                        if (seen[i] == lab) {
                            known = true;
                            break;
                        }
                    if (!known) seen[n_seen++] = lab;
                }
            }
            if (n_seen < 3) continue;
            bool suppressed = false;
            for (const Vec2& p : out) {
                if (std::max(std::abs(p.x - x), std::abs(p.y - y)) < min_spacing) {
                    suppressed = true;
                    break;
                }
            }
            if (!suppressed) out.push_back({static_cast<double>(x), static_cast<double>(y)});
        }
    }
    return out;
}

std::vector<double> interface_feature(const RgbImage& image, int cx, int cy,
                                      int window, int bins) {
    if (window < 1 || window % 2 == 0)
        fail(ErrorKind::BadParameter, "interface window must be odd and positive");
    if (cx < 0 || cx >= image.width || cy < 0 || cy >= image.height)
        fail(ErrorKind::BadParameter, "interface center outside the image");
    const int half = window / 2;
    std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
    for (int y = std::max(0, cy - half); y <= std::min(image.height - 1, cy + half); ++y)
        for (int x = std::max(0, cx - half); x <= std::min(image.width - 1, cx + half); ++x)
            hog_accumulate(image, x, y, hist);
    return hog_normalize(std::move(hist));
}

FeatureTable compute_features(const RgbImage& image, const Decomposition& d,
                              const FeatureConfig& cfg) {
    if (image.width != d.width || image.height != d.height)
        fail(ErrorKind::FormatViolation, "image and decomposition dimensions differ");
    FeatureTable t;
    switch (cfg.region_kind) {
        case RegionFeatureKind::MeanRgb: t.region_dim = 3; break;
        case RegionFeatureKind::CumulativeRgbHist9: t.region_dim = 27; break;
        case RegionFeatureKind::Hog: t.region_dim = cfg.hog_bins; break;
    }
    t.region_features.resize(static_cast<std::size_t>(d.k) * t.region_dim);
    t.region_barycenters.resize(static_cast<std::size_t>(d.k));
    t.erosion_fallback.assign(static_cast<std::size_t>(d.k), 0);
    for (std::int32_t id = 0; id < d.k; ++id) {
        bool fellback = false;
        std::vector<std::int32_t> pixels = erode_region(d, id, cfg.beta, &fellback);
        // The offset is meant to trim unreliable border pixels while keeping
        // almost all of the region. Thin or ragged superpixels can survive
        // erosion with only a handful of pixels, and statistics over so few
        // samples are noise; treat that like a fully eroded region. A small
        // but not tiny remainder is kept: pure-interior statistics over few
        // samples are noisy but unbiased, whereas falling back reintroduces
        // exactly the border pixels the offset exists to discard.
        if (!fellback && cfg.beta > 0 && pixels.size() < 8) {
            pixels = d.members[id];
            fellback = true;
        }
        t.erosion_fallback[id] = fellback ? 1 : 0;
        Vec2 bary{0.0, 0.0};
        for (std::int32_t p : pixels) {
            bary.x += p % d.width;
            bary.y += p / d.width;
        }
        bary.x /= static_cast<double>(pixels.size());
        bary.y /= static_cast<double>(pixels.size());
        t.region_barycenters[id] = bary;
        const std::vector<double> f =
            region_feature(image, pixels, cfg.region_kind, cfg.hog_bins);
        std::copy(f.begin(), f.end(),
                  t.region_features.begin() + static_cast<std::size_t>(id) * t.region_dim);
    }

    t.interface_dim = cfg.hog_bins;
    t.interface_positions = detect_interfaces(d, cfg.interface_min_spacing);
    t.interface_features.resize(t.interface_positions.size() *
                                static_cast<std::size_t>(t.interface_dim));
    for (std::size_t i = 0; i < t.interface_positions.size(); ++i) {
        const std::vector<double> f =
            interface_feature(image, static_cast<int>(t.interface_positions[i].x),
                              static_cast<int>(t.interface_positions[i].y),
                              cfg.interface_window, cfg.hog_bins);
        std::copy(f.begin(), f.end(),
                  t.interface_features.begin() + i * static_cast<std::size_t>(t.interface_dim));
    }
    return t;
}

namespace {

constexpr std::uint32_t kCacheVersion = 1;

void put_u32(std::FILE* f, std::uint32_t v) {
    const std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                               static_cast<std::uint8_t>(v >> 16),
                               static_cast<std::uint8_t>(v >> 24)};
    std::fwrite(b, 1, 4, f);
}

void put_f32(std::FILE* f, double v) {
    const float fv = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &fv, 4);
    put_u32(f, bits);
}

std::uint32_t get_u32(std::FILE* f, const std::string& path) {
    std::uint8_t b[4];
    if (std::fread(b, 1, 4, f) != 4)
        fail(ErrorKind::FormatViolation, "truncated feature cache: " + path);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

double get_f32(std::FILE* f, const std::string& path) {
    const std::uint32_t bits = get_u32(f, path);
    float fv;
    std::memcpy(&fv, &bits, 4);
    return static_cast<double>(fv);
}

}  // namespace

void write_feature_cache(const std::string& path,
                         const std::vector<FeatureTable>& tables) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) fail(ErrorKind::MissingFile, "cannot write feature cache: " + path);
    std::fwrite("DSPF", 1, 4, f);
    put_u32(f, kCacheVersion);
    put_u32(f, static_cast<std::uint32_t>(tables.size()));
    for (const FeatureTable& t : tables) {
        const std::uint32_t k =
            static_cast<std::uint32_t>(t.region_barycenters.size());
        put_u32(f, k);
        put_u32(f, static_cast<std::uint32_t>(t.region_dim));
        put_u32(f, static_cast<std::uint32_t>(t.interface_count()));
        put_u32(f, static_cast<std::uint32_t>(t.interface_dim));
        for (std::uint32_t i = 0; i < k; ++i) {
            put_f32(f, t.region_barycenters[i].x);
            put_f32(f, t.region_barycenters[i].y);
            std::fputc(t.erosion_fallback[i] ? 1 : 0, f);
            for (int j = 0; j < t.region_dim; ++j)
                put_f32(f, t.region_features[static_cast<std::size_t>(i) * t.region_dim + j]);
        }
        for (std::size_t i = 0; i < t.interface_count(); ++i) {
            put_f32(f, t.interface_positions[i].x);
            put_f32(f, t.interface_positions[i].y);
            for (int j = 0; j < t.interface_dim; ++j)
                put_f32(f, t.interface_features[i * t.interface_dim + j]);
        }
    }
    if (std::fclose(f) != 0) fail(ErrorKind::MissingFile, "failed writing " + path);
}

std::vector<FeatureTable> read_feature_cache(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) fail(ErrorKind::MissingFile, "cannot open feature cache: " + path);
    struct Closer {
        std::FILE* f;
        ~Closer() { std::fclose(f); }
    } closer{f};

    char magic[4];
    if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, "DSPF", 4) != 0)
        fail(ErrorKind::FormatViolation, "not a feature cache: " + path);
    const std::uint32_t version = get_u32(f, path);
    if (version != kCacheVersion)
        fail(ErrorKind::FormatViolation,
             "unsupported feature cache version " + std::to_string(version));
    const std::uint32_t count = get_u32(f, path);
    std::vector<FeatureTable> tables(count);
    for (FeatureTable& t : tables) {
        const std::uint32_t k = get_u32(f, path);
        t.region_dim = static_cast<int>(get_u32(f, path));
        const std::uint32_t n_if = get_u32(f, path);
        t.interface_dim = static_cast<int>(get_u32(f, path));
        t.region_barycenters.resize(k);
        t.erosion_fallback.resize(k);
        t.region_features.resize(static_cast<std::size_t>(k) * t.region_dim);
        for (std::uint32_t i = 0; i < k; ++i) {
            t.region_barycenters[i].x = get_f32(f, path);
            t.region_barycenters[i].y = get_f32(f, path);
            const int flag = std::fgetc(f);
            if (flag == EOF) fail(ErrorKind::FormatViolation, "truncated feature cache: " + path);
            t.erosion_fallback[i] = static_cast<std::uint8_t>(flag);
            for (int j = 0; j < t.region_dim; ++j)
                t.region_features[static_cast<std::size_t>(i) * t.region_dim + j] =
                    get_f32(f, path);
        }
        t.interface_positions.resize(n_if);
        t.interface_features.resize(static_cast<std::size_t>(n_if) * t.interface_dim);
        for (std::uint32_t i = 0; i < n_if; ++i) {
            t.interface_positions[i].x = get_f32(f, path);
            t.interface_positions[i].y = get_f32(f, path);
            for (int j = 0; j < t.interface_dim; ++j)
                t.interface_features[static_cast<std::size_t>(i) * t.interface_dim + j] =
                    get_f32(f, path);
        }
    }
    return tables;
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
    const std::uint8_t* bytes = static_cast<const std::uint8_t*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace dspm
