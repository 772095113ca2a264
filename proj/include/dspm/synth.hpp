#pragma once

#include <cstdint>
#include <vector>

#include "dspm/decomp.hpp"
#include "dspm/image.hpp"
#include "dspm/label.hpp"

namespace dspm {

// A pair of mosaics built from the same oriented stripe textures laid out
// in two different tile permutations, with the tile grids as ground-truth
// decompositions. angle_a[t] / angle_b[t] give the orientation index
// (0..orientations-1, step 180/orientations degrees) of tile t.
struct TexturePair {
    RgbImage image_a;
    RgbImage image_b;
    Decomposition tiles_a;
    Decomposition tiles_b;
    std::vector<int> angle_a;
    std::vector<int> angle_b;
};

// Square mosaic of grid x grid tiles, each filled with a sinusoidal stripe
// pattern (period 8 px, amplitude 80 around mid-gray) at one of
// `orientations` evenly spaced angles in [0, 180). Both images use every
// orientation exactly once (grid*grid == orientations), in independent
// seeded permutations with independent stripe phases.
TexturePair gen_textures(int size, std::uint64_t seed, int grid = 4,
                         int orientations = 16);

// Per-pixel i.i.d. Gaussian noise with the given variance on each channel,
// clamped to [0, 255]. Variance 0 returns the input bit-identical.
RgbImage add_noise(const RgbImage& img, double variance, std::uint64_t seed);

// Nearest-neighbor resampling (no interpolation): output dimension
// round(dim * factor), source pixel = min(floor(x / factor), dim - 1).
RgbImage scale_image_nn(const RgbImage& img, double factor);
GrayImage16 scale_labels_nn(const GrayImage16& labels, double factor);
ClassMap scale_class_map_nn(const ClassMap& m, double factor);
// Scales the label map and rebuilds the decomposition (repairing any
// connectivity damage from downsampling).
Decomposition scale_decomposition_nn(const Decomposition& d, double factor);

// One library entry resampled by a randomly drawn factor.
struct ScaledCopy {
    RgbImage image;
    Decomposition decomp;
    double factor = 1.0;
};

// Resample each (image, decomposition) pair by a factor drawn uniformly
// from `factors`. Deterministic per seed.
std::vector<ScaledCopy> gen_scaled_library(
    const std::vector<const RgbImage*>& images,
    const std::vector<const Decomposition*>& decomps,
    const std::vector<double>& factors, std::uint64_t seed);

// Structured matching benchmark scene: soft color background, objects of
// repeated colors distinguished only by shape and stripe orientation,
// dark outlines, mild blur and noise. Deterministic per seed.
RgbImage gen_test_scene(int width, int height, std::uint64_t seed);

// Portrait-like labeled scene with three classes:
// 0 = background, 1 = skin, 2 = hair. Hair colors are drawn near the
// background palette so appearance alone is ambiguous.
struct LabeledScene {
    RgbImage image;
    ClassMap classes;
};
LabeledScene gen_labeled_scene(int width, int height, std::uint64_t seed);

}  // namespace dspm
