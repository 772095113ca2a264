#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dspm/decomp.hpp"
#include "dspm/image.hpp"
#include "dspm/match.hpp"

namespace dspm {

// Color for a 2-D displacement on the optical-flow color wheel
// (direction -> hue, relative magnitude in [0,1] -> saturation).
void flow_color(double dx, double dy, double max_norm, std::uint8_t rgb[3]);

// Paint each query superpixel with the flow-wheel color of its match
// displacement (library barycenter minus query barycenter). When a
// superpixel has several records (multiple runs), the lowest-distance
// one wins. Superpixels without a record stay black.
RgbImage render_displacement(const Decomposition& query,
                             const std::vector<MatchRecord>& matches,
                             const std::vector<const Decomposition*>& library);

// Blend a class palette over the image (50/50), darken superpixel
// boundaries, and stamp `annotation` (digits, '.', '%', '-') in the
// top-left corner.
RgbImage render_label_overlay(const RgbImage& image, const Decomposition& d,
                              const std::vector<std::int32_t>& classes,
                              const std::string& annotation);

// Fixed palette for class indices (cycles after 12 entries).
void class_color(int cls, std::uint8_t rgb[3]);

}  // namespace dspm
