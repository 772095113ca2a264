#pragma once

// Adapters from library types to the brute-force reference shapes, plus
// small randomized-instance builders shared by the unit and integration
// tests. Everything here is deterministic given the caller's Rng.

#include <cstdint>
#include <utility>
#include <vector>

#include "dspm/decomp.hpp"
#include "dspm/dsp.hpp"
#include "dspm/features.hpp"
#include "dspm/rng.hpp"
#include "oracle.hpp"

namespace testutil {

inline oracle::OPatch to_opatch(const dspm::DualSuperpatch& p) {
    oracle::OPatch o;
    o.cx = p.center.x;
    o.cy = p.center.y;
    o.radius = p.radius;
    o.center_index = p.center_index;
    for (std::size_t i = 0; i < p.region_count(); ++i) {
        oracle::ORegion r;
        r.sx = p.region_sp[i].x;
        r.sy = p.region_sp[i].y;
        r.rx = p.region_pos[i].x;
        r.ry = p.region_pos[i].y;
        r.f.assign(p.region_feature(i), p.region_feature(i) + p.region_dim);
        o.regions.push_back(std::move(r));
    }
    for (std::size_t i = 0; i < p.interface_count(); ++i) {
        oracle::OInterface it;
        it.x = p.interface_pos[i].x;
        it.y = p.interface_pos[i].y;
        it.f.assign(p.interface_feature(i), p.interface_feature(i) + p.interface_dim);
        o.interfaces.push_back(std::move(it));
    }
    return o;
}

inline oracle::OMap to_omap(const dspm::Decomposition& d, const dspm::FeatureTable& t) {
    oracle::OMap m;
    m.w = d.width;
    m.h = d.height;
    m.labels.assign(d.labels.begin(), d.labels.end());
    for (std::int32_t id = 0; id < d.k; ++id)
        m.feats.emplace_back(t.region_feature(id), t.region_feature(id) + t.region_dim);
    return m;
}

// Synthetic superpatch detached from any decomposition: region 0 sits at
// the center, the rest at offsets within the radius; eroded barycenters
// are jittered copies of the superpixel barycenters.
inline dspm::DualSuperpatch random_patch(dspm::Rng& rng, int min_regions, int max_regions,
                                         int feature_dim, int min_ifaces, int max_ifaces,
                                         double min_radius = 20.0,
                                         double max_radius = 80.0) {
    dspm::DualSuperpatch p;
    p.center = {rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)};
    p.radius = rng.uniform(min_radius, max_radius);
    p.center_id = 0;
    p.center_index = 0;
    p.region_dim = feature_dim;
    const int n = rng.uniform_int(min_regions, max_regions);
    for (int i = 0; i < n; ++i) {
        dspm::Vec2 sp = p.center;
        if (i > 0) {
            // Rejection-sample an offset inside the radius.
            for (;;) {
                const dspm::Vec2 off{rng.uniform(-p.radius, p.radius),
                                     rng.uniform(-p.radius, p.radius)};
                if (off.norm_sq() <= p.radius * p.radius) {
                    sp = p.center + off;
                    break;
                }
            }
        }
        p.region_ids.push_back(i);
        p.region_sp.push_back(sp);
        p.region_pos.push_back(sp + dspm::Vec2{rng.uniform(-2.0, 2.0),
                                               rng.uniform(-2.0, 2.0)});
        for (int f = 0; f < feature_dim; ++f)
            p.region_features.push_back(rng.uniform01());
    }
    p.interface_dim = feature_dim;
    const int ni = rng.uniform_int(min_ifaces, max_ifaces);
    for (int i = 0; i < ni; ++i) {
        p.interface_pos.push_back(p.center + dspm::Vec2{rng.uniform(-p.radius, p.radius),
                                                        rng.uniform(-p.radius, p.radius)});
        for (int f = 0; f < feature_dim; ++f)
            p.interface_features.push_back(rng.uniform01());
    }
    return p;
}

// Random Voronoi decomposition: pixels labeled by their nearest seed
// (ties -> lowest seed index), repaired for 4-connectivity.
inline dspm::Decomposition random_voronoi(dspm::Rng& rng, int w, int h, int sites) {
    std::vector<dspm::Vec2> seeds;
    for (int i = 0; i < sites; ++i)
        seeds.push_back({rng.uniform(0.0, w - 1.0), rng.uniform(0.0, h - 1.0)});
    std::vector<std::int32_t> labels(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int best = 0;
            double best_d = 1e300;
            for (int i = 0; i < sites; ++i) {
                const double d =
                    (dspm::Vec2{static_cast<double>(x), static_cast<double>(y)} - seeds[i])
                        .norm_sq();
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            labels[static_cast<std::size_t>(y) * w + x] = best;
        }
    return dspm::build_decomposition(w, h,
                                     dspm::enforce_connectivity(w, h, std::move(labels)));
}

// Feature table with random region features (and optional random
// interface points) over an existing decomposition. Region barycenters
// are the true superpixel barycenters with a small jitter, standing in
// for eroded-set barycenters.
inline dspm::FeatureTable random_table(dspm::Rng& rng, const dspm::Decomposition& d,
                                       int region_dim, int interfaces,
                                       int interface_dim) {
    dspm::FeatureTable t;
    t.region_dim = region_dim;
    t.erosion_fallback.assign(static_cast<std::size_t>(d.k), 0);
    for (std::int32_t id = 0; id < d.k; ++id) {
        t.region_barycenters.push_back(d.barycenters[id] +
                                       dspm::Vec2{rng.uniform(-1.0, 1.0),
                                                  rng.uniform(-1.0, 1.0)});
        for (int f = 0; f < region_dim; ++f) t.region_features.push_back(rng.uniform01());
    }
    t.interface_dim = interface_dim;
    for (int i = 0; i < interfaces; ++i) {
        t.interface_positions.push_back(
            {rng.uniform(0.0, d.width - 1.0), rng.uniform(0.0, d.height - 1.0)});
        for (int f = 0; f < interface_dim; ++f)
            t.interface_features.push_back(rng.uniform01());
    }
    return t;
}

}  // namespace testutil
