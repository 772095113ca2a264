#include "dspm/label.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "dspm/error.hpp"

namespace dspm {

std::vector<std::int32_t> majority_classes(const Decomposition& d, const ClassMap& gt) {
    if (gt.width != d.width || gt.height != d.height)
        fail(ErrorKind::FormatViolation, "class map and decomposition dimensions differ");
    std::vector<std::vector<std::int32_t>> counts(
        static_cast<std::size_t>(d.k),
        std::vector<std::int32_t>(static_cast<std::size_t>(gt.num_classes), 0));
    for (std::size_t p = 0; p < d.pixel_count(); ++p) {
        const std::int32_t cls = gt.classes[p];
        if (cls < 0 || cls >= gt.num_classes)
            fail(ErrorKind::FormatViolation, "class value out of range in class map");
        ++counts[d.labels[p]][cls];
    }
    std::vector<std::int32_t> out(static_cast<std::size_t>(d.k), 0);
    for (std::int32_t id = 0; id < d.k; ++id) {
        std::int32_t best = 0;
        for (int m = 1; m < gt.num_classes; ++m)
            if (counts[id][m] > counts[id][best]) best = m;
        out[id] = best;
    }
    return out;
}

LabelScores fuse_labels(const std::vector<MatchRecord>& matches,
                        const std::vector<std::vector<std::int32_t>>& lib_classes,
                        int num_classes, int query_superpixels) {
    if (num_classes < 1) fail(ErrorKind::BadParameter, "need at least one class");
    LabelScores s;
    s.k = query_superpixels;
    s.num_classes = num_classes;
    for (const MatchRecord& r : matches) {
        if (std::find(s.scales.begin(), s.scales.end(), r.scale) == s.scales.end())
            s.scales.push_back(r.scale);
    }
    std::sort(s.scales.begin(), s.scales.end());
    if (s.scales.empty()) s.scales.push_back(0.0);
    const std::size_t n_scales = s.scales.size();
    s.scores.assign(static_cast<std::size_t>(query_superpixels) * n_scales * num_classes,
                    0.0);
    s.no_matches.assign(static_cast<std::size_t>(query_superpixels) * n_scales, 0);

    // Bucket matches per (superpixel, scale).
    std::vector<std::vector<const MatchRecord*>> buckets(
        static_cast<std::size_t>(query_superpixels) * n_scales);
    for (const MatchRecord& r : matches) {
        if (r.src < 0 || r.src >= query_superpixels)
            fail(ErrorKind::FormatViolation, "match source superpixel out of range");
        if (r.lib_image < 0 || r.lib_image >= static_cast<std::int32_t>(lib_classes.size()))
            fail(ErrorKind::FormatViolation, "match library image out of range");
        if (r.lib_sp < 0 ||
            r.lib_sp >= static_cast<std::int32_t>(lib_classes[r.lib_image].size()))
            fail(ErrorKind::FormatViolation, "match library superpixel out of range");
        const std::size_t scale_idx =
            std::lower_bound(s.scales.begin(), s.scales.end(), r.scale) - s.scales.begin();
        buckets[static_cast<std::size_t>(r.src) * n_scales + scale_idx].push_back(&r);
    }

    std::vector<double> dists;
    for (std::int32_t sp = 0; sp < query_superpixels; ++sp) {
        for (std::size_t sc = 0; sc < n_scales; ++sc) {
            const std::size_t bucket = static_cast<std::size_t>(sp) * n_scales + sc;
            const std::vector<const MatchRecord*>& rows = buckets[bucket];
            double* scores = s.scores.data() + bucket * num_classes;
            if (rows.empty()) {
                s.no_matches[bucket] = 1;
                for (int m = 0; m < num_classes; ++m)
                    scores[m] = 1.0 / static_cast<double>(num_classes);
                continue;
            }
            dists.clear();
            for (const MatchRecord* r : rows) dists.push_back(r->distance);
            std::sort(dists.begin(), dists.end());
            double h = dists.size() % 2 == 1
                           ? dists[dists.size() / 2]
                           : 0.5 * (dists[dists.size() / 2 - 1] + dists[dists.size() / 2]);
            h = std::max(h, 1e-12);
            double total = 0.0;
            for (const MatchRecord* r : rows) {
                const std::int32_t cls = lib_classes[r->lib_image][r->lib_sp];
                if (cls < 0 || cls >= num_classes)
                    fail(ErrorKind::FormatViolation, "library class out of range");
                const double w = std::exp(-(r->distance * r->distance) / (h * h));
                scores[cls] += w;
                total += w;
            }
            for (int m = 0; m < num_classes; ++m) scores[m] /= total;
        }
    }
    return s;
}

std::vector<std::int32_t> decide_labels(const LabelScores& s) {
    std::vector<std::int32_t> out(static_cast<std::size_t>(s.k), 0);
    for (std::int32_t sp = 0; sp < s.k; ++sp) {
        std::int32_t best_cls = 0;
        double best_score = -1.0;
        for (int m = 0; m < s.num_classes; ++m) {
            double peak = 0.0;
            for (std::size_t sc = 0; sc < s.scales.size(); ++sc)
                peak = std::max(peak, s.at(sp, static_cast<int>(sc), m));
            if (peak > best_score) {
                best_score = peak;
                best_cls = m;
            }
        }
        out[sp] = best_cls;
    }
    return out;
}

Accuracy evaluate(const std::vector<std::int32_t>& predictions, const ClassMap& gt,
                  const Decomposition& d) {
    if (static_cast<int>(predictions.size()) != d.k)
        fail(ErrorKind::BadParameter, "one prediction per superpixel required");
    const std::vector<std::int32_t> majority = majority_classes(d, gt);
    std::size_t sp_hits = 0;
    for (std::int32_t id = 0; id < d.k; ++id)
        if (predictions[id] == majority[id]) ++sp_hits;
    std::size_t px_hits = 0;
    for (std::size_t p = 0; p < d.pixel_count(); ++p)
        if (predictions[d.labels[p]] == gt.classes[p]) ++px_hits;
    return {static_cast<double>(sp_hits) / d.k,
            static_cast<double>(px_hits) / static_cast<double>(d.pixel_count())};
}

ClassMap load_class_map(const std::string& png_path) {
    const GrayImage8 img = load_gray8_png(png_path);
    ClassMap m;
    m.width = img.width;
    m.height = img.height;
    m.classes.assign(img.pixels.begin(), img.pixels.end());
    std::int32_t max_cls = 0;
    for (std::int32_t v : m.classes) max_cls = std::max(max_cls, v);
    m.num_classes = max_cls + 1;
    return m;
}

void save_class_map(const std::string& png_path, const ClassMap& m) {
    if (m.num_classes > 256)
        fail(ErrorKind::FormatViolation, "class maps support at most 256 classes");
    GrayImage8 img;
    img.width = m.width;
    img.height = m.height;
    img.pixels.resize(m.classes.size());
    for (std::size_t i = 0; i < m.classes.size(); ++i)
        img.pixels[i] = static_cast<std::uint8_t>(m.classes[i]);
    save_gray8_png(png_path, img);
}

ClassMap paint_classes(const Decomposition& d,
                       const std::vector<std::int32_t>& predictions, int num_classes) {
    ClassMap m;
    m.width = d.width;
    m.height = d.height;
    m.num_classes = num_classes;
    m.classes.resize(d.pixel_count());
    for (std::size_t p = 0; p < d.pixel_count(); ++p)
        m.classes[p] = predictions[d.labels[p]];
    return m;
}

void save_label_output(const std::string& png_path, const std::string& json_path,
                       const Decomposition& d,
                       const std::vector<std::int32_t>& predictions,
                       const std::vector<std::string>& class_names) {
    save_class_map(png_path,
                   paint_classes(d, predictions, static_cast<int>(class_names.size())));
    nlohmann::json j;
    j["classes"] = class_names;
    std::ofstream out(json_path);
    if (!out) fail(ErrorKind::MissingFile, "cannot write " + json_path);
    out << j.dump(2) << "\n";
}

}  // namespace dspm
