#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dspm/geometry.hpp"
#include "dspm/image.hpp"

namespace dspm {

// A partition of an image into connected superpixels with ids 0..K-1.
// Labels are stored row-major, one int32 per pixel.
struct Decomposition {
    int width = 0;
    int height = 0;
    int k = 0;                            // number of superpixels
    std::vector<std::int32_t> labels;     // width*height, values in [0, k)
    std::vector<Vec2> barycenters;        // per superpixel, mean pixel position
    std::vector<std::vector<std::int32_t>> adjacency;  // sorted ascending, 4-connectivity
    std::vector<std::vector<std::int32_t>> members;    // raster-order pixel indices
    bool remapped = false;                // ids were not contiguous in the input

    std::int32_t label_at(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * height;
    }
    // Expected superpixel spacing sqrt(|I|/K).
    double mean_spacing() const;
    // Half the expected spacing; the default spatial bandwidth for
    // neighborhood-consistency weights.
    double sigma1() const;
    // Superpixel id covering an arbitrary (possibly fractional or
    // out-of-bounds) position: round half away from zero, then clamp
    // each coordinate into the image rectangle.
    std::int32_t superpixel_at(double x, double y) const;
};

// Validate a raw label map and derive all per-superpixel data.
// Requirements: width*height == labels.size(), every id non-negative,
// each used id forms one 4-connected component. Ids need not be
// contiguous: gaps are compacted in increasing order and `remapped`
// is set. Violations raise FormatViolation.
Decomposition build_decomposition(int width, int height,
                                  std::vector<std::int32_t> labels);

// Read a label map stored as 16-bit grayscale PNG (pixel value = id)
// and check it against the paired RGB image's dimensions.
Decomposition load_decomposition(const std::string& label_png_path,
                                 const RgbImage& image);
Decomposition load_decomposition(const std::string& label_png_path,
                                 const std::string& image_png_path);

// Write the label map back out as 16-bit grayscale (value = id).
GrayImage16 to_label_map(const Decomposition& d);

// Merge every connected component that is not the largest component of
// its label into an adjacent region, leaving each id 4-connected.
// Returns the repaired raw label map (ids may become non-contiguous if
// a label vanishes entirely; run build_decomposition afterwards).
std::vector<std::int32_t> enforce_connectivity(int width, int height,
                                               std::vector<std::int32_t> labels);

// SLIC-style k-means over (L, a, b, x, y) with grid-seeded, jittered
// initialization. Deterministic for a fixed seed. `compactness`
// balances spatial against color distance (10 is the usual choice).
Decomposition generate_slic(const RgbImage& image, int k_target,
                            double compactness = 10.0,
                            std::uint64_t seed = 0,
                            int iterations = 10);

}  // namespace dspm
