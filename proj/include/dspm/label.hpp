#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dspm/decomp.hpp"
#include "dspm/image.hpp"
#include "dspm/match.hpp"

namespace dspm {

// Dense per-pixel class annotation.
struct ClassMap {
    int width = 0;
    int height = 0;
    int num_classes = 0;
    std::vector<std::int32_t> classes;  // row-major, values in [0, num_classes)

    std::int32_t at(int x, int y) const {
        return classes[static_cast<std::size_t>(y) * width + x];
    }
};

// Most frequent class among each superpixel's pixels; ties -> lowest class.
std::vector<std::int32_t> majority_classes(const Decomposition& d, const ClassMap& gt);

// Fused class scores per (superpixel, scale): normalized sums of
// match weights omega = exp(-D^2 / h^2), h the median match distance of
// that superpixel at that scale (floored at 1e-12).
struct LabelScores {
    int k = 0;            // query superpixel count
    int num_classes = 0;
    std::vector<double> scales;           // ascending, one block per scale
    std::vector<double> scores;           // k x scales x classes
    std::vector<std::uint8_t> no_matches; // k x scales: uniform fallback taken

    double at(std::int32_t sp, int scale_idx, int cls) const {
        return scores[(static_cast<std::size_t>(sp) * scales.size() + scale_idx) *
                          num_classes +
                      cls];
    }
};

// `lib_classes[image][superpixel]` is the ground-truth class of a library
// superpixel (typically from majority_classes of its own annotation).
LabelScores fuse_labels(const std::vector<MatchRecord>& matches,
                        const std::vector<std::vector<std::int32_t>>& lib_classes,
                        int num_classes, int query_superpixels);

// Final decision: the class whose best across-scale score is highest;
// ties -> lowest class index.
std::vector<std::int32_t> decide_labels(const LabelScores& scores);

struct Accuracy {
    double superpixel_accuracy = 0.0;  // predictions matching the majority class
    double pixel_accuracy = 0.0;       // pixels correct after painting superpixels
};

Accuracy evaluate(const std::vector<std::int32_t>& predictions, const ClassMap& gt,
                  const Decomposition& d);

// Class maps travel as 8-bit grayscale PNG (pixel value = class index)
// with a JSON sidecar listing class names by index.
ClassMap load_class_map(const std::string& png_path);
void save_class_map(const std::string& png_path, const ClassMap& m);
void save_label_output(const std::string& png_path, const std::string& json_path,
                       const Decomposition& d,
                       const std::vector<std::int32_t>& predictions,
                       const std::vector<std::string>& class_names);

// Paint each superpixel with its class.
ClassMap paint_classes(const Decomposition& d,
                       const std::vector<std::int32_t>& predictions, int num_classes);

}  // namespace dspm
