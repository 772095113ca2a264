#pragma once

#include <cstdint>
#include <vector>

#include "dspm/decomp.hpp"
#include "dspm/features.hpp"
#include "dspm/geometry.hpp"

namespace dspm {

// Radius-bounded neighborhood descriptor of one superpixel: every region
// whose superpixel barycenter lies within `radius` of the center, plus
// every interface point within the same radius. Feature rows are stored
// flat, one per region/interface, in the owning table's dimension.
struct DualSuperpatch {
    std::int32_t center_id = -1;
    Vec2 center{0.0, 0.0};        // barycenter of the central superpixel
    double radius = 0.0;
    int center_index = -1;        // position of the central region below

    std::vector<std::int32_t> region_ids;
    std::vector<Vec2> region_sp;    // superpixel barycenters: the position of a
                                    // region everywhere (inclusion, weighting,
                                    // projection) — border offsets change only
                                    // which pixels feed the feature vector
    int region_dim = 0;
    std::vector<double> region_features;

    std::vector<Vec2> interface_pos;
    int interface_dim = 0;
    std::vector<double> interface_features;

    std::size_t region_count() const { return region_ids.size(); }
    std::size_t interface_count() const { return interface_pos.size(); }
    const double* region_feature(std::size_t idx) const {
        return region_features.data() + idx * region_dim;
    }
    const double* interface_feature(std::size_t idx) const {
        return interface_features.data() + idx * interface_dim;
    }
};

// Radii used when searching a library: the query-side radius and the set
// of library-side radii.
struct ScaleSet {
    double source_radius = 50.0;
    std::vector<double> library_radii{50.0};
};

// Gather regions and interfaces within `r` of the center superpixel's
// barycenter (Euclidean, inclusive). The central region is always
// present, even at r = 0.
DualSuperpatch build_dsp(const Decomposition& d, const FeatureTable& feats,
                         std::int32_t center, double r);

// Multiply every center-relative coordinate by target_radius / p.radius
// and restate it absolutely; features are untouched.
DualSuperpatch rescale_dsp(const DualSuperpatch& p, double target_radius);

}  // namespace dspm
