#include "dspm/dist.hpp"

#include <cmath>
#include <limits>

#include "dspm/error.hpp"

namespace dspm {

double weight_w(const Vec2& x1, const Vec2& x2, const Vec2& c1, const Vec2& c2,
                double sigma1) {
    const Vec2 projected{x1.x - (c1.x - c2.x), x1.y - (c1.y - c2.y)};
    return std::exp(-(x2 - projected).norm_sq() / (sigma1 * sigma1));
}

double weight_ws(const Vec2& x, const Vec2& c, double r) {
    const double d2 = (x - c).norm_sq();
    if (d2 == 0.0) return 1.0;  // exact center, even when r == 0
    return std::exp(-d2 / (2.0 * r * r));
}

double feature_l2(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

namespace {

// Ratio applied to b-side offsets to express them in a's scale; 1 when
// cross-scale adjustment is off or the radii match.
double b_to_a_ratio(const DualSuperpatch& a, const DualSuperpatch& b,
                    const DistanceConfig& cfg) {
    return cfg.rescale ? a.radius / b.radius : 1.0;
}

void check_region_dims(const DualSuperpatch& a, const DualSuperpatch& b) {
    if (a.region_dim != b.region_dim)
        fail(ErrorKind::BadParameter, "region feature dimensions differ");
    if (a.region_count() == 0 || b.region_count() == 0)
        fail(ErrorKind::BadParameter, "superpatch without regions");
}

}  // namespace

double distance_quadratic(const DualSuperpatch& a, const DualSuperpatch& b,
                          const DistanceConfig& cfg) {
    check_region_dims(a, b);
    if (cfg.sigma1 <= 0.0) fail(ErrorKind::BadParameter, "sigma1 must be positive");
    const double scale_b = b_to_a_ratio(a, b, cfg);

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.region_count(); ++i) {
        const Vec2 off_a = a.region_sp[i] - a.center;
        const double wsa = weight_ws(a.region_sp[i], a.center, a.radius);
        for (std::size_t j = 0; j < b.region_count(); ++j) {
            const Vec2 off_b = b.region_sp[j] - b.center;
            // Registered displacement, measured in a's scale.
            const Vec2 disp{off_b.x * scale_b - off_a.x, off_b.y * scale_b - off_a.y};
            const double wsb = weight_ws(b.region_sp[j], b.center, b.radius);
            const double w =
                std::exp(-disp.norm_sq() / (cfg.sigma1 * cfg.sigma1)) * wsa * wsb;
            num += w * feature_l2(a.region_feature(i), b.region_feature(j), a.region_dim);
            den += w;
        }
    }
    if (den == 0.0)
        return feature_l2(a.region_feature(a.center_index),
                          b.region_feature(b.center_index), a.region_dim);
    return num / den;
}

namespace {

// Directed projected distance with an explicit probe ratio (a-side
// offsets are multiplied by `a_to_b` to land in b's native pixel grid).
double projected_directed(const DualSuperpatch& a, const Vec2& b_center,
                          const Decomposition& decomp_b, const FeatureTable& feats_b,
                          double a_to_b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.region_count(); ++i) {
        const Vec2 off = a.region_sp[i] - a.center;
        const std::int32_t hit =
            decomp_b.superpixel_at(b_center.x + a_to_b * off.x, b_center.y + a_to_b * off.y);
        const double ws = weight_ws(a.region_pos[i], a.center, a.radius);
        num += ws * feature_l2(a.region_feature(i), feats_b.region_feature(hit),
                               a.region_dim);
        den += ws;
    }
    return den == 0.0 ? 0.0 : num / den;
}

}  // namespace

double distance_projected(const DualSuperpatch& a, const DualSuperpatch& b,
                          const Decomposition& decomp_b, const FeatureTable& feats_b,
                          const DistanceConfig& cfg) {
    check_region_dims(a, b);
    const double a_to_b = cfg.rescale ? b.radius / a.radius : 1.0;
    return projected_directed(a, b.center, decomp_b, feats_b, a_to_b);
}

double distance_projected_symmetric(const DualSuperpatch& a, const DualSuperpatch& b,
                                    const Decomposition& decomp_a,
                                    const FeatureTable& feats_a,
                                    const Decomposition& decomp_b,
                                    const FeatureTable& feats_b,
                                    const DistanceConfig& cfg) {
    check_region_dims(a, b);
    const double a_to_b = cfg.rescale ? b.radius / a.radius : 1.0;
    const double b_to_a = cfg.rescale ? a.radius / b.radius : 1.0;
    const double ab = projected_directed(a, b.center, decomp_b, feats_b, a_to_b);
    const double ba = projected_directed(b, a.center, decomp_a, feats_a, b_to_a);
    return 0.5 * (ab + ba);
}

namespace {

// Directed interface distance: b-side offsets are multiplied by
// `b_to_a` so both sides are measured in a's scale.
double interfaces_directed(const DualSuperpatch& a, const DualSuperpatch& b,
                           double b_to_a) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.interface_count(); ++i) {
        const Vec2 off_a = a.interface_pos[i] - a.center;
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b.interface_count(); ++j) {
            const Vec2 off_b = (b.interface_pos[j] - b.center) * b_to_a;
            const double dist = (off_a - off_b).norm_sq();
            if (dist < best_d) {
                best_d = dist;
                best = j;
            }
        }
        const double ws = weight_ws(a.interface_pos[i], a.center, a.radius);
        num += ws * feature_l2(a.interface_feature(i), b.interface_feature(best),
                               a.interface_dim);
        den += ws;
    }
    return den == 0.0 ? 0.0 : num / den;
}

}  // namespace

std::optional<double> distance_interfaces(const DualSuperpatch& a,
                                          const DualSuperpatch& b,
                                          const DistanceConfig& cfg) {
    if (a.interface_count() == 0 || b.interface_count() == 0) return std::nullopt;
    if (a.interface_dim != b.interface_dim)
        fail(ErrorKind::BadParameter, "interface feature dimensions differ");
    const double b_to_a = cfg.rescale ? a.radius / b.radius : 1.0;
    const double a_to_b = cfg.rescale ? b.radius / a.radius : 1.0;
    const double ab = interfaces_directed(a, b, b_to_a);
    const double ba = interfaces_directed(b, a, a_to_b);
    return 0.5 * (ab + ba);
}

DualDistance distance_dual(const DualSuperpatch& a, const DualSuperpatch& b,
                           const Decomposition& decomp_a, const FeatureTable& feats_a,
                           const Decomposition& decomp_b, const FeatureTable& feats_b,
                           const DistanceConfig& cfg) {
    if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
        fail(ErrorKind::BadParameter, "alpha must lie in [0, 1]");
    const auto region_term = [&] {
        switch (cfg.mode) {
            case DistanceMode::Quadratic:
                return distance_quadratic(a, b, cfg);
            case DistanceMode::ProjectedAsym:
                return distance_projected(a, b, decomp_b, feats_b, cfg);
            case DistanceMode::Projected:
                break;
        }
        return distance_projected_symmetric(a, b, decomp_a, feats_a, decomp_b,
                                            feats_b, cfg);
    };
    if (cfg.alpha == 1.0) return {region_term(), false};

    const std::optional<double> interfaces = distance_interfaces(a, b, cfg);
    if (!interfaces) {
        // No interface points on one side: score on regions at full weight.
        return {region_term(), true};
    }
    const double region = cfg.alpha > 0.0 ? region_term() : 0.0;
    return {cfg.alpha * region + (1.0 - cfg.alpha) * *interfaces, false};
}

}  // namespace dspm
