#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dspm/decomp.hpp"
#include "dspm/geometry.hpp"
#include "dspm/image.hpp"

namespace dspm {

enum class RegionFeatureKind {
    MeanRgb,             // 3-vector, mean channel values in [0, 255]
    CumulativeRgbHist9,  // 27-vector, per-channel normalized cumulative histogram
    Hog,                 // oriented-gradient histogram over the region's pixels
};

struct FeatureConfig {
    int beta = 1;                  // erosion offset in pixels
    RegionFeatureKind region_kind = RegionFeatureKind::CumulativeRgbHist9;
    int interface_window = 9;      // side of the square window, odd
    int hog_bins = 9;
    int interface_min_spacing = 4; // Chebyshev suppression distance
};

// All descriptors of one image: per-superpixel region features with the
// barycenter of the eroded pixel set, and one feature per detected
// interface point.
struct FeatureTable {
    int region_dim = 0;
    std::vector<double> region_features;       // K x region_dim, row per superpixel
    std::vector<Vec2> region_barycenters;      // eroded-set barycenter per superpixel
    std::vector<std::uint8_t> erosion_fallback;  // 1 where erosion emptied the region
    int interface_dim = 0;
    std::vector<Vec2> interface_positions;
    std::vector<double> interface_features;    // N x interface_dim

    const double* region_feature(std::int32_t id) const {
        return region_features.data() + static_cast<std::size_t>(id) * region_dim;
    }
    std::size_t interface_count() const { return interface_positions.size(); }
};

// Pixels of superpixel `id` whose city-block distance to every
// differently-labeled pixel exceeds `beta`. The image border is not a
// boundary. An empty result falls back to the full member list and sets
// *fallback (if given).
std::vector<std::int32_t> erode_region(const Decomposition& d, std::int32_t id,
                                       int beta, bool* fallback = nullptr);

// Feature vector over an explicit pixel list.
std::vector<double> region_feature(const RgbImage& image,
                                   const std::vector<std::int32_t>& pixels,
                                   RegionFeatureKind kind, int hog_bins = 9);

// Interface points: pixels whose clamped 3x3 neighborhood holds >= 3
// distinct labels, scanned in raster order, keeping a point only when no
// previously kept point is within Chebyshev distance < min_spacing.
std::vector<Vec2> detect_interfaces(const Decomposition& d, int min_spacing);

// Oriented-gradient histogram on a square window centered at (cx, cy),
// clamped at image borders: luminance gradients by central differences
// with border replication, unsigned orientation, soft assignment between
// the two nearest bins, magnitude weighting, L2 normalization (zero
// vector when nothing exceeds 1e-9).
std::vector<double> interface_feature(const RgbImage& image, int cx, int cy,
                                      int window, int bins);

FeatureTable compute_features(const RgbImage& image, const Decomposition& d,
                              const FeatureConfig& cfg);

// Binary descriptor cache holding the tables of one or more images.
// Layout documented in docs/FORMATS.md.
void write_feature_cache(const std::string& path,
                         const std::vector<FeatureTable>& tables);
std::vector<FeatureTable> read_feature_cache(const std::string& path);

// FNV-1a over arbitrary bytes; used to key cache files by content.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 14695981039346656037ull);

}  // namespace dspm
