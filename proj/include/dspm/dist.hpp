#pragma once

#include <optional>

#include "dspm/decomp.hpp"
#include "dspm/dsp.hpp"
#include "dspm/features.hpp"
#include "dspm/geometry.hpp"

namespace dspm {

// How the region term of the dual distance is computed.
enum class DistanceMode {
    Quadratic,      // one-to-many double sum over region pairs
    ProjectedAsym,  // directed projected distance a -> b only
    Projected,      // symmetric projected distance (the default)
};

struct DistanceConfig {
    double alpha = 0.5;    // region/interface trade-off in the dual distance
    double sigma1 = 1.0;   // spatial bandwidth of the pairwise weight w,
                           // 0.5 * sqrt(|I|/K) of the query image
    double radius = 50.0;  // query-side extraction radius r
    bool rescale = true;   // adjust coordinates by the radius ratio when
                           // the two structures were extracted at
                           // different radii
    DistanceMode mode = DistanceMode::Projected;
};

// exp(-||x2 - (x1 - (c1 - c2))||^2 / sigma1^2): closeness of two
// barycenters after registering both structures on their centers.
double weight_w(const Vec2& x1, const Vec2& x2, const Vec2& c1, const Vec2& c2,
                double sigma1);

// exp(-||x - c||^2 / (2 r^2)): falloff of a descriptor's influence with
// its distance to the structure's center.
double weight_ws(const Vec2& x, const Vec2& c, double r);

double feature_l2(const double* a, const double* b, int dim);

// One-to-many distance: w * w_s * w_s weighted mean of pairwise feature
// distances over all region pairs, superpixel barycenters driving every
// weight. Each side's w_s uses its own extraction radius. Degenerate
// zero-weight case falls back to the center-feature distance.
double distance_quadratic(const DualSuperpatch& a, const DualSuperpatch& b,
                          const DistanceConfig& cfg);

// Directed projected distance a -> b: each region of `a` probes the
// library decomposition at b's center plus the (ratio-scaled) offset of
// its superpixel barycenter from a's center, and compares against the
// region feature of the superpixel found there, weighted by w_s of the
// eroded-region barycenter in a's own frame.
double distance_projected(const DualSuperpatch& a, const DualSuperpatch& b,
                          const Decomposition& decomp_b, const FeatureTable& feats_b,
                          const DistanceConfig& cfg);

// Mean of the two directed projected distances; exactly symmetric.
double distance_projected_symmetric(const DualSuperpatch& a, const DualSuperpatch& b,
                                    const Decomposition& decomp_a,
                                    const FeatureTable& feats_a,
                                    const Decomposition& decomp_b,
                                    const FeatureTable& feats_b,
                                    const DistanceConfig& cfg);

// Symmetric nearest-neighbor distance between the interface sets: each
// interface pairs with the one whose center-relative (ratio-scaled)
// offset is nearest (ties -> lowest index), w_s-weighted and normalized
// like the projected distance. Empty on either side -> nullopt.
std::optional<double> distance_interfaces(const DualSuperpatch& a,
                                          const DualSuperpatch& b,
                                          const DistanceConfig& cfg);

struct DualDistance {
    double value = 0.0;
    bool interfaces_absent = false;  // interface term was skipped (no points)
};

// alpha * region term + (1 - alpha) * interface term; an absent
// interface term leaves the region term at full weight.
DualDistance distance_dual(const DualSuperpatch& a, const DualSuperpatch& b,
                           const Decomposition& decomp_a, const FeatureTable& feats_a,
                           const Decomposition& decomp_b, const FeatureTable& feats_b,
                           const DistanceConfig& cfg);

}  // namespace dspm
