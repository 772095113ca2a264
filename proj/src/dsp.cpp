#include "dspm/dsp.hpp"

#include <algorithm>

#include "dspm/error.hpp"

namespace dspm {

DualSuperpatch build_dsp(const Decomposition& d, const FeatureTable& feats,
                         std::int32_t center, double r) {
    if (center < 0 || center >= d.k)
        fail(ErrorKind::BadParameter, "superpatch center id out of range");
    if (r < 0.0) fail(ErrorKind::BadParameter, "superpatch radius must be >= 0");

    DualSuperpatch p;
    p.center_id = center;
    p.center = d.barycenters[center];
    p.radius = r;
    p.region_dim = feats.region_dim;
    p.interface_dim = feats.interface_dim;

    const double r2 = r * r;
    for (std::int32_t id = 0; id < d.k; ++id) {
        if (id != center && (d.barycenters[id] - p.center).norm_sq() > r2) continue;
        if (id == center) p.center_index = static_cast<int>(p.region_ids.size());
        p.region_ids.push_back(id);
        p.region_sp.push_back(d.barycenters[id]);
        p.region_pos.push_back(feats.region_barycenters[id]);
        const double* f = feats.region_feature(id);
        p.region_features.insert(p.region_features.end(), f, f + feats.region_dim);
    }

    for (std::size_t i = 0; i < feats.interface_count(); ++i) {
        if ((feats.interface_positions[i] - p.center).norm_sq() > r2) continue;
        p.interface_pos.push_back(feats.interface_positions[i]);
        const double* f = feats.interface_features.data() +
                          i * static_cast<std::size_t>(feats.interface_dim);
        p.interface_features.insert(p.interface_features.end(), f, f + feats.interface_dim);
    }
    return p;
}

DualSuperpatch rescale_dsp(const DualSuperpatch& p, double target_radius) {
    if (p.radius <= 0.0 || target_radius <= 0.0)
        fail(ErrorKind::BadParameter, "rescale requires positive radii");
    DualSuperpatch out = p;
    const double rho = target_radius / p.radius;
    for (std::size_t i = 0; i < out.region_sp.size(); ++i) {
        out.region_sp[i] = p.center + (p.region_sp[i] - p.center) * rho;
        out.region_pos[i] = p.center + (p.region_pos[i] - p.center) * rho;
    }
    for (std::size_t i = 0; i < out.interface_pos.size(); ++i)
        out.interface_pos[i] = p.center + (p.interface_pos[i] - p.center) * rho;
    out.radius = target_radius;
    return out;
}

}  // namespace dspm
