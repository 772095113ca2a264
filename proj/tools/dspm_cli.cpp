// Batch front end: decompose images into superpixels, extract dual
// descriptors, search correspondences, transfer labels, and emit
// evaluation tables and visualizations.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dspm/decomp.hpp"
#include "dspm/dist.hpp"
#include "dspm/error.hpp"
#include "dspm/features.hpp"
#include "dspm/label.hpp"
#include "dspm/match.hpp"
#include "dspm/synth.hpp"
#include "dspm/viz.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

dspm::RegionFeatureKind parse_feature_kind(const std::string& name) {
    if (name == "mean-rgb") return dspm::RegionFeatureKind::MeanRgb;
    if (name == "cumulative-rgb-hist-9")
        return dspm::RegionFeatureKind::CumulativeRgbHist9;
    if (name == "hog") return dspm::RegionFeatureKind::Hog;
    dspm::fail(dspm::ErrorKind::BadParameter,
               "unknown region feature kind: " + name);
}

dspm::DistanceMode parse_mode(const std::string& name) {
    if (name == "quadratic") return dspm::DistanceMode::Quadratic;
    if (name == "projected-asym") return dspm::DistanceMode::ProjectedAsym;
    if (name == "projected") return dspm::DistanceMode::Projected;
    dspm::fail(dspm::ErrorKind::BadParameter, "unknown distance mode: " + name);
}

// Options shared by the feature-consuming subcommands.
struct FeatureFlags {
    int beta = 1;
    std::string kind = "cumulative-rgb-hist-9";
    int window = 9;
    int hog_bins = 9;
    int min_spacing = 4;
    std::string cache_dir;

    void attach(CLI::App* cmd) {
        cmd->add_option("--beta", beta, "Erosion offset in pixels")
            ->capture_default_str();
        cmd->add_option("--feature", kind,
                        "Region feature kind: mean-rgb, cumulative-rgb-hist-9, hog")
            ->capture_default_str();
        cmd->add_option("--window", window, "Interface descriptor window side (odd)")
            ->capture_default_str();
        cmd->add_option("--hog-bins", hog_bins, "Orientation bins")
            ->capture_default_str();
        cmd->add_option("--min-spacing", min_spacing,
                        "Minimum Chebyshev distance between interface points")
            ->capture_default_str();
        cmd->add_option("--cache-dir", cache_dir,
                        "Reuse descriptor tables stored under this directory");
    }

    dspm::FeatureConfig config() const {
        dspm::FeatureConfig cfg;
        cfg.beta = beta;
        cfg.region_kind = parse_feature_kind(kind);
        cfg.interface_window = window;
        cfg.hog_bins = hog_bins;
        cfg.interface_min_spacing = min_spacing;
        return cfg;
    }
};

std::uint64_t content_hash(const dspm::RgbImage& image, const dspm::Decomposition& d,
                           const dspm::FeatureConfig& cfg) {
    std::uint64_t h = dspm::fnv1a(image.pixels.data(), image.pixels.size());
    h = dspm::fnv1a(d.labels.data(), d.labels.size() * sizeof(std::int32_t), h);
    const std::int32_t fields[6] = {image.width, image.height, cfg.beta,
                                    static_cast<std::int32_t>(cfg.region_kind),
                                    cfg.interface_window, cfg.hog_bins};
    h = dspm::fnv1a(fields, sizeof(fields), h);
    const std::int32_t spacing = cfg.interface_min_spacing;
    return dspm::fnv1a(&spacing, sizeof(spacing), h);
}

dspm::FeatureTable cached_features(const dspm::RgbImage& image,
                                   const dspm::Decomposition& d,
                                   const dspm::FeatureConfig& cfg,
                                   const std::string& cache_dir) {
    if (cache_dir.empty()) return dspm::compute_features(image, d, cfg);
    fs::create_directories(cache_dir);
    char name[32];
    std::snprintf(name, sizeof(name), "%016llx.dspf",
                  static_cast<unsigned long long>(content_hash(image, d, cfg)));
    const fs::path path = fs::path(cache_dir) / name;
    if (fs::exists(path)) {
        std::vector<dspm::FeatureTable> tables =
            dspm::read_feature_cache(path.string());
        if (tables.size() == 1) return std::move(tables[0]);
    }
    dspm::FeatureTable table = dspm::compute_features(image, d, cfg);
    std::vector<dspm::FeatureTable> tables;
    tables.push_back(table);
    dspm::write_feature_cache(path.string(), tables);
    return table;
}

struct ManifestEntry {
    std::string image;
    std::string labels;
    std::string classes;  // optional, empty when absent
};

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) dspm::fail(dspm::ErrorKind::MissingFile, "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        dspm::fail(dspm::ErrorKind::FormatViolation,
                   path + " is not valid JSON: " + e.what());
    }
    if (!j.contains("entries") || !j["entries"].is_array() || j["entries"].empty())
        dspm::fail(dspm::ErrorKind::FormatViolation,
                   path + " needs a non-empty \"entries\" array");
    const fs::path base = fs::path(path).parent_path();
    std::vector<ManifestEntry> out;
    for (const json& e : j["entries"]) {
        if (!e.contains("image") || !e.contains("labels"))
            dspm::fail(dspm::ErrorKind::FormatViolation,
                       "manifest entries need \"image\" and \"labels\" paths");
        ManifestEntry m;
        m.image = (base / e["image"].get<std::string>()).string();
        m.labels = (base / e["labels"].get<std::string>()).string();
        if (e.contains("classes"))
            m.classes = (base / e["classes"].get<std::string>()).string();
        out.push_back(std::move(m));
    }
    return out;
}

// A fully loaded library: images, decompositions, descriptors, and
// (when present) per-superpixel majority classes.
struct Library {
    std::vector<dspm::RgbImage> images;
    std::vector<dspm::Decomposition> decomps;
    std::vector<dspm::FeatureTable> feats;
    std::vector<std::vector<std::int32_t>> classes;
    bool has_classes = true;
    int num_classes = 0;

    std::vector<dspm::LibraryImage> views() const {
        std::vector<dspm::LibraryImage> v;
        for (std::size_t i = 0; i < images.size(); ++i)
            v.push_back({&decomps[i], &feats[i]});
        return v;
    }
};

Library load_library(const std::string& manifest_path, const FeatureFlags& ff) {
    const std::vector<ManifestEntry> entries = load_manifest(manifest_path);
    Library lib;
    const dspm::FeatureConfig cfg = ff.config();
    for (const ManifestEntry& e : entries) {
        dspm::RgbImage image = dspm::load_rgb_png(e.image);
        dspm::Decomposition d = dspm::load_decomposition(e.labels, image);
        lib.feats.push_back(cached_features(image, d, cfg, ff.cache_dir));
        if (e.classes.empty()) {
            lib.has_classes = false;
        } else {
            const dspm::ClassMap cm = dspm::load_class_map(e.classes);
            lib.num_classes = std::max(lib.num_classes, cm.num_classes);
            lib.classes.push_back(dspm::majority_classes(d, cm));
        }
        lib.images.push_back(std::move(image));
        lib.decomps.push_back(std::move(d));
    }
    return lib;
}

// Per-superpixel best record (lowest distance; first on ties).
std::vector<const dspm::MatchRecord*> best_per_src(
    const std::vector<dspm::MatchRecord>& records, int k) {
    std::vector<const dspm::MatchRecord*> best(static_cast<std::size_t>(k), nullptr);
    for (const dspm::MatchRecord& r : records) {
        if (r.src < 0 || r.src >= k)
            dspm::fail(dspm::ErrorKind::FormatViolation,
                       "match source superpixel out of range");
        if (!best[r.src] || r.distance < best[r.src]->distance) best[r.src] = &r;
    }
    return best;
}

double mean_displacement(const dspm::Decomposition& query,
                         const std::vector<dspm::Decomposition>& lib,
                         const std::vector<dspm::MatchRecord>& records) {
    const std::vector<const dspm::MatchRecord*> best = best_per_src(records, query.k);
    double sum = 0.0;
    for (std::int32_t i = 0; i < query.k; ++i) {
        if (!best[i]) dspm::fail(dspm::ErrorKind::FormatViolation,
                                 "superpixel without any match record");
        const dspm::Vec2 d = lib[best[i]->lib_image].barycenters[best[i]->lib_sp] -
                             query.barycenters[i];
        sum += d.norm();
    }
    return sum / query.k;
}

double mean_distance(const std::vector<dspm::MatchRecord>& records, int k) {
    const std::vector<const dspm::MatchRecord*> best = best_per_src(records, k);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += best[i] ? best[i]->distance : 0.0;
    return sum / k;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream out(path);
    if (!out) dspm::fail(dspm::ErrorKind::MissingFile, "cannot write " + path);
    out << text;
}

// ---------------------------------------------------------------------------
// Subcommand state + handlers
// ---------------------------------------------------------------------------

struct DecomposeArgs {
    std::string image, out;
    int k = 250;
    double compactness = 10.0;
    std::uint64_t seed = 0;
    int iterations = 10;
};

void run_decompose(const DecomposeArgs& a) {
    const dspm::RgbImage image = dspm::load_rgb_png(a.image);
    const dspm::Decomposition d =
        dspm::generate_slic(image, a.k, a.compactness, a.seed, a.iterations);
    dspm::save_gray16_png(a.out, dspm::to_label_map(d));
    std::printf("%s: %d superpixels\n", a.out.c_str(), d.k);
}

struct FeaturesArgs {
    std::string image, labels, out;
    FeatureFlags ff;
};

void run_features(const FeaturesArgs& a) {
    const dspm::RgbImage image = dspm::load_rgb_png(a.image);
    const dspm::Decomposition d = dspm::load_decomposition(a.labels, image);
    std::vector<dspm::FeatureTable> tables;
    tables.push_back(dspm::compute_features(image, d, a.ff.config()));
    dspm::write_feature_cache(a.out, tables);
    std::printf("%s: %d regions, %zu interface points\n", a.out.c_str(), d.k,
                tables[0].interface_count());
}

struct MatchArgs {
    std::string image, labels, library, out;
    FeatureFlags ff;
    double radius = 50.0;
    double alpha = 0.5;
    double sigma1 = 0.0;  // 0: derive from the query decomposition
    std::string mode = "projected";
    bool no_rescale = false;
    std::vector<double> scales;
    bool per_scale = false;
    int iterations = 5;
    int runs = 50;
    std::uint64_t seed = 0;
    bool exhaustive = false;
    int k = 0;  // exhaustive: top-k; randomized: keep first k runs
    int threads = 1;
};

std::vector<dspm::MatchRecord> run_match_impl(const MatchArgs& a,
                                              const dspm::Decomposition& query,
                                              const dspm::FeatureTable& query_feats,
                                              const Library& lib) {
    dspm::SearchConfig cfg;
    cfg.iterations = a.iterations;
    cfg.runs = a.runs;
    cfg.seed = a.seed;
    cfg.scales.source_radius = a.radius;
    cfg.scales.library_radii = a.scales.empty() ? std::vector<double>{a.radius}
                                                : a.scales;
    cfg.dist.alpha = a.alpha;
    cfg.dist.sigma1 = a.sigma1;
    cfg.dist.radius = a.radius;
    cfg.dist.rescale = !a.no_rescale;
    cfg.dist.mode = parse_mode(a.mode);
    cfg.per_scale = a.per_scale;
    cfg.threads = a.threads;
    const dspm::MatchEngine engine(query, query_feats, lib.views(), cfg);
    if (a.exhaustive) return engine.exhaustive(a.k > 0 ? a.k : 1);
    std::vector<dspm::MatchRecord> records = engine.dspm();
    if (a.k > 0) records = dspm::knn_collect(records, a.k);
    return records;
}

void run_match(const MatchArgs& a) {
    const dspm::RgbImage image = dspm::load_rgb_png(a.image);
    const dspm::Decomposition query = dspm::load_decomposition(a.labels, image);
    const dspm::FeatureTable query_feats =
        cached_features(image, query, a.ff.config(), a.ff.cache_dir);
    const Library lib = load_library(a.library, a.ff);
    const std::vector<dspm::MatchRecord> records =
        run_match_impl(a, query, query_feats, lib);
    dspm::write_matches_csv(a.out, records);
    std::printf("%s: %zu records\n", a.out.c_str(), records.size());
}

struct LabelArgs {
    std::string image, labels, library, matches, out, sidecar;
    FeatureFlags ff;  // used to derive library majority classes' decomps
    std::vector<std::string> names;
};

void run_label(const LabelArgs& a) {
    const dspm::RgbImage image = dspm::load_rgb_png(a.image);
    const dspm::Decomposition query = dspm::load_decomposition(a.labels, image);
    const std::vector<ManifestEntry> entries = load_manifest(a.library);
    std::vector<std::vector<std::int32_t>> lib_classes;
    int num_classes = 0;
    for (const ManifestEntry& e : entries) {
        if (e.classes.empty())
            dspm::fail(dspm::ErrorKind::FormatViolation,
                       "label transfer needs \"classes\" for every library entry");
        const dspm::Decomposition d = dspm::load_decomposition(e.labels, e.image);
        const dspm::ClassMap cm = dspm::load_class_map(e.classes);
        num_classes = std::max(num_classes, cm.num_classes);
        lib_classes.push_back(dspm::majority_classes(d, cm));
    }
    if (!a.names.empty()) num_classes = static_cast<int>(a.names.size());
    const std::vector<dspm::MatchRecord> records = dspm::read_matches_csv(a.matches);
    const dspm::LabelScores scores =
        dspm::fuse_labels(records, lib_classes, num_classes, query.k);
    const std::vector<std::int32_t> predictions = dspm::decide_labels(scores);
    std::vector<std::string> names = a.names;
    for (int m = static_cast<int>(names.size()); m < num_classes; ++m)
        names.push_back("class" + std::to_string(m));
    const std::string sidecar =
        a.sidecar.empty() ? a.out + ".json" : a.sidecar;
    dspm::save_label_output(a.out, sidecar, query, predictions, names);
    std::printf("%s: %d superpixels labeled\n", a.out.c_str(), query.k);
}

struct EvalArgs {
    std::string pred, gt, labels;
};

void run_eval(const EvalArgs& a) {
    const dspm::ClassMap pred = dspm::load_class_map(a.pred);
    dspm::ClassMap gt = dspm::load_class_map(a.gt);
    const dspm::GrayImage16 lm = dspm::load_gray16_png(a.labels);
    const dspm::Decomposition d = dspm::build_decomposition(
        lm.width, lm.height,
        std::vector<std::int32_t>(lm.pixels.begin(), lm.pixels.end()));
    gt.num_classes = std::max(gt.num_classes, pred.num_classes);
    dspm::ClassMap pred_aligned = pred;
    pred_aligned.num_classes = gt.num_classes;
    const std::vector<std::int32_t> predictions =
        dspm::majority_classes(d, pred_aligned);
    const dspm::Accuracy acc = dspm::evaluate(predictions, gt, d);
    json j;
    j["superpixel_accuracy"] = acc.superpixel_accuracy;
    j["pixel_accuracy"] = acc.pixel_accuracy;
    std::printf("%s\n", j.dump().c_str());
}

struct VizFlowArgs {
    std::string image, labels, library, matches, out;
};

void run_viz_flow(const VizFlowArgs& a) {
    const dspm::RgbImage image = dspm::load_rgb_png(a.image);
    const dspm::Decomposition query = dspm::load_decomposition(a.labels, image);
    const std::vector<ManifestEntry> entries = load_manifest(a.library);
    std::vector<dspm::Decomposition> decomps;
    for (const ManifestEntry& e : entries)
        decomps.push_back(dspm::load_decomposition(e.labels, e.image));
    std::vector<const dspm::Decomposition*> views;
    for (const dspm::Decomposition& d : decomps) views.push_back(&d);
    const std::vector<dspm::MatchRecord> records = dspm::read_matches_csv(a.matches);
    dspm::save_rgb_png(a.out, dspm::render_displacement(query, records, views));
    std::printf("%s written\n", a.out.c_str());
}

struct VizLabelsArgs {
    std::string image, labels, pred, gt, out;
};

void run_viz_labels(const VizLabelsArgs& a) {
    const dspm::RgbImage image = dspm::load_rgb_png(a.image);
    const dspm::Decomposition d = dspm::load_decomposition(a.labels, image);
    dspm::ClassMap pred = dspm::load_class_map(a.pred);
    std::string annotation = "-";
    if (!a.gt.empty()) {
        dspm::ClassMap gt = dspm::load_class_map(a.gt);
        gt.num_classes = std::max(gt.num_classes, pred.num_classes);
        pred.num_classes = gt.num_classes;
        const dspm::Accuracy acc =
            dspm::evaluate(dspm::majority_classes(d, pred), gt, d);
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * acc.superpixel_accuracy);
        annotation = buf;
    }
    const std::vector<std::int32_t> classes = dspm::majority_classes(d, pred);
    dspm::save_rgb_png(a.out, dspm::render_label_overlay(image, d, classes, annotation));
    std::printf("%s written\n", a.out.c_str());
}

struct SynthTexturesArgs {
    int size = 256;
    int grid = 4;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

void run_synth_textures(const SynthTexturesArgs& a) {
    const dspm::TexturePair pair =
        dspm::gen_textures(a.size, a.seed, a.grid, a.grid * a.grid);
    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    dspm::save_rgb_png((dir / "a.png").string(), pair.image_a);
    dspm::save_rgb_png((dir / "b.png").string(), pair.image_b);
    dspm::save_gray16_png((dir / "a_labels.png").string(),
                          dspm::to_label_map(pair.tiles_a));
    dspm::save_gray16_png((dir / "b_labels.png").string(),
                          dspm::to_label_map(pair.tiles_b));
    json meta;
    meta["orientations"] = a.grid * a.grid;
    meta["angles_a"] = pair.angle_a;
    meta["angles_b"] = pair.angle_b;
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << "\n";
    std::printf("%s: texture pair written\n", a.out_dir.c_str());
}

struct SynthNoiseArgs {
    std::string image, out;
    double variance = 50.0;
    std::uint64_t seed = 0;
};

void run_synth_noise(const SynthNoiseArgs& a) {
    dspm::save_rgb_png(
        a.out, dspm::add_noise(dspm::load_rgb_png(a.image), a.variance, a.seed));
    std::printf("%s written\n", a.out.c_str());
}

struct SynthSceneArgs {
    int width = 250, height = 250;
    std::uint64_t seed = 0;
    std::string out;
};

void run_synth_scene(const SynthSceneArgs& a) {
    dspm::save_rgb_png(a.out, dspm::gen_test_scene(a.width, a.height, a.seed));
    std::printf("%s written\n", a.out.c_str());
}

struct SynthFacesArgs {
    int width = 160, height = 160;
    std::uint64_t seed = 0;
    int count = 1;
    int k = 0;  // when > 0, also decompose and write a manifest
    std::string out_dir = ".";
};

void run_synth_faces(const SynthFacesArgs& a) {
    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    json manifest;
    manifest["entries"] = json::array();
    for (int i = 0; i < a.count; ++i) {
        const dspm::LabeledScene scene =
            dspm::gen_labeled_scene(a.width, a.height, a.seed + i);
        char image_name[32], classes_name[32], labels_name[32];
        std::snprintf(image_name, sizeof(image_name), "image_%03d.png", i);
        std::snprintf(classes_name, sizeof(classes_name), "classes_%03d.png", i);
        std::snprintf(labels_name, sizeof(labels_name), "labels_%03d.png", i);
        dspm::save_rgb_png((dir / image_name).string(), scene.image);
        dspm::save_class_map((dir / classes_name).string(), scene.classes);
        json entry;
        entry["image"] = image_name;
        entry["classes"] = classes_name;
        if (a.k > 0) {
            const dspm::Decomposition d =
                dspm::generate_slic(scene.image, a.k, 10.0, a.seed + i);
            dspm::save_gray16_png((dir / labels_name).string(),
                                  dspm::to_label_map(d));
            entry["labels"] = labels_name;
        }
        manifest["entries"].push_back(entry);
    }
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
    std::printf("%s: %d labeled scenes\n", a.out_dir.c_str(), a.count);
}

struct SynthScaledArgs {
    std::string library;
    std::vector<double> factors = {0.5, 2.0 / 3.0, 1.5, 2.0};
    std::uint64_t seed = 0;
    std::string out_dir = ".";
};

void run_synth_scaled(const SynthScaledArgs& a) {
    const std::vector<ManifestEntry> entries = load_manifest(a.library);
    std::vector<dspm::RgbImage> images;
    std::vector<dspm::Decomposition> decomps;
    std::vector<std::string> class_paths;
    for (const ManifestEntry& e : entries) {
        images.push_back(dspm::load_rgb_png(e.image));
        decomps.push_back(dspm::load_decomposition(e.labels, images.back()));
        class_paths.push_back(e.classes);
    }
    std::vector<const dspm::RgbImage*> image_views;
    std::vector<const dspm::Decomposition*> decomp_views;
    for (std::size_t i = 0; i < images.size(); ++i) {
        image_views.push_back(&images[i]);
        decomp_views.push_back(&decomps[i]);
    }
    const std::vector<dspm::ScaledCopy> copies =
        dspm::gen_scaled_library(image_views, decomp_views, a.factors, a.seed);

    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    json manifest;
    manifest["entries"] = json::array();
    for (std::size_t i = 0; i < copies.size(); ++i) {
        char image_name[32], labels_name[32], classes_name[32];
        std::snprintf(image_name, sizeof(image_name), "image_%03zu.png", i);
        std::snprintf(labels_name, sizeof(labels_name), "labels_%03zu.png", i);
        std::snprintf(classes_name, sizeof(classes_name), "classes_%03zu.png", i);
        dspm::save_rgb_png((dir / image_name).string(), copies[i].image);
        dspm::save_gray16_png((dir / labels_name).string(),
                              dspm::to_label_map(copies[i].decomp));
        json entry;
        entry["image"] = image_name;
        entry["labels"] = labels_name;
        entry["factor"] = copies[i].factor;
        if (!class_paths[i].empty()) {
            const dspm::ClassMap scaled = dspm::scale_class_map_nn(
                dspm::load_class_map(class_paths[i]), copies[i].factor);
            dspm::save_class_map((dir / classes_name).string(), scaled);
            entry["classes"] = classes_name;
        }
        manifest["entries"].push_back(entry);
    }
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
    std::printf("%s: %zu scaled copies\n", a.out_dir.c_str(), copies.size());
}

// Sweeps: matching quality against a second decomposition of the same
// image across radii or alpha values, and label-transfer accuracy across
// library-side scales with rescaling on and off.

struct SweepPairArgs {
    std::string image, labels_a, labels_b, out;
    FeatureFlags ff;
    std::vector<double> values;  // radii or alphas
    double radius = 50.0;
    double alpha = 0.5;
    std::string mode = "projected";
    bool exhaustive = true;
    int iterations = 5, runs = 10;
    std::uint64_t seed = 0;
    int threads = 1;
};

std::vector<dspm::MatchRecord> sweep_pair_match(
    const SweepPairArgs& a, const dspm::Decomposition& da,
    const dspm::FeatureTable& fa, const Library& lib, double radius,
    double alpha) {
    dspm::SearchConfig cfg;
    cfg.iterations = a.iterations;
    cfg.runs = a.runs;
    cfg.seed = a.seed;
    cfg.scales.source_radius = radius;
    cfg.scales.library_radii = {radius};
    cfg.dist.alpha = alpha;
    cfg.dist.sigma1 = 0.0;
    cfg.dist.radius = radius;
    cfg.dist.mode = parse_mode(a.mode);
    cfg.threads = a.threads;
    const dspm::MatchEngine engine(da, fa, lib.views(), cfg);
    return a.exhaustive ? engine.exhaustive(1) : engine.dspm();
}

void run_sweep_pair(const SweepPairArgs& a, bool over_radius) {
    const dspm::RgbImage image = dspm::load_rgb_png(a.image);
    const dspm::Decomposition da = dspm::load_decomposition(a.labels_a, image);
    const dspm::Decomposition db = dspm::load_decomposition(a.labels_b, image);
    const dspm::FeatureConfig fcfg = a.ff.config();
    const dspm::FeatureTable fa = cached_features(image, da, fcfg, a.ff.cache_dir);
    Library lib;
    lib.images.push_back(image);
    lib.decomps.push_back(db);
    lib.feats.push_back(cached_features(image, db, fcfg, a.ff.cache_dir));
    lib.has_classes = false;

    std::string csv = over_radius ? "radius,mean_displacement,mean_distance\n"
                                  : "alpha,mean_displacement,mean_distance\n";
    for (double v : a.values) {
        const double radius = over_radius ? v : a.radius;
        const double alpha = over_radius ? a.alpha : v;
        const std::vector<dspm::MatchRecord> records =
            sweep_pair_match(a, da, fa, lib, radius, alpha);
        char line[96];
        std::snprintf(line, sizeof(line), "%g,%.6f,%.6f\n", v,
                      mean_displacement(da, lib.decomps, records),
                      mean_distance(records, da.k));
        csv += line;
    }
    write_text(a.out, csv);
}

struct SweepScalesArgs {
    std::string image, labels, classes, library, out;
    FeatureFlags ff;
    std::vector<double> scales = {25.0, 100.0 / 3.0, 50.0, 75.0, 100.0};
    double radius = 50.0;
    double alpha = 0.5;
    int k = 7;
    std::uint64_t seed = 0;
    int threads = 1;
};

void run_sweep_scales(const SweepScalesArgs& a) {
    const dspm::RgbImage image = dspm::load_rgb_png(a.image);
    const dspm::Decomposition query = dspm::load_decomposition(a.labels, image);
    const dspm::ClassMap gt = dspm::load_class_map(a.classes);
    const dspm::FeatureTable query_feats =
        cached_features(image, query, a.ff.config(), a.ff.cache_dir);
    const Library lib = load_library(a.library, a.ff);
    if (!lib.has_classes)
        dspm::fail(dspm::ErrorKind::FormatViolation,
                   "scale sweep needs \"classes\" for every library entry");

    std::string csv = "scale,rescale,superpixel_accuracy,pixel_accuracy\n";
    auto run_setting = [&](const std::vector<double>& radii, bool rescale,
                           const std::string& label) {
        dspm::SearchConfig cfg;
        cfg.seed = a.seed;
        cfg.scales.source_radius = a.radius;
        cfg.scales.library_radii = radii;
        cfg.dist.alpha = a.alpha;
        cfg.dist.sigma1 = 0.0;
        cfg.dist.radius = a.radius;
        cfg.dist.rescale = rescale;
        cfg.threads = a.threads;
        const dspm::MatchEngine engine(query, query_feats, lib.views(), cfg);
        const std::vector<dspm::MatchRecord> records = engine.exhaustive(a.k);
        const dspm::LabelScores scores =
            dspm::fuse_labels(records, lib.classes, lib.num_classes, query.k);
        const dspm::Accuracy acc =
            dspm::evaluate(dspm::decide_labels(scores), gt, query);
        char line[96];
        std::snprintf(line, sizeof(line), "%s,%s,%.6f,%.6f\n", label.c_str(),
                      rescale ? "on" : "off", acc.superpixel_accuracy,
                      acc.pixel_accuracy);
        csv += line;
    };
    for (double s : a.scales) {
        char label[32];
        std::snprintf(label, sizeof(label), "%g", s);
        run_setting({s}, true, label);
        run_setting({s}, false, label);
    }
    run_setting(a.scales, true, "fused");
    run_setting(a.scales, false, "fused");
    write_text(a.out, csv);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Superpixel-neighborhood matching and label transfer"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML-style key/value configuration file");

    auto decompose = std::make_shared<DecomposeArgs>();
    CLI::App* cmd = app.add_subcommand("decompose", "Segment an image into superpixels");
    cmd->add_option("--image", decompose->image, "Input RGB PNG")->required();
    cmd->add_option("--out", decompose->out, "Output 16-bit label PNG")->required();
    cmd->add_option("--k", decompose->k, "Target superpixel count")
        ->capture_default_str();
    cmd->add_option("--compactness", decompose->compactness,
                    "Spatial regularity weight")
        ->capture_default_str();
    cmd->add_option("--seed", decompose->seed, "Seed jitter")->capture_default_str();
    cmd->add_option("--iters", decompose->iterations, "Assignment iterations")
        ->capture_default_str();
    cmd->callback([decompose] { run_decompose(*decompose); });

    auto features = std::make_shared<FeaturesArgs>();
    cmd = app.add_subcommand("features", "Extract dual descriptors");
    cmd->add_option("--image", features->image, "Input RGB PNG")->required();
    cmd->add_option("--labels", features->labels, "Superpixel label PNG")->required();
    cmd->add_option("--out", features->out, "Output descriptor table")->required();
    features->ff.attach(cmd);
    cmd->callback([features] { run_features(*features); });

    auto match = std::make_shared<MatchArgs>();
    cmd = app.add_subcommand("match", "Search correspondences into a library");
    cmd->add_option("--image", match->image, "Query RGB PNG")->required();
    cmd->add_option("--labels", match->labels, "Query label PNG")->required();
    cmd->add_option("--library", match->library, "Library manifest JSON")->required();
    cmd->add_option("--out", match->out, "Output matches CSV")->required();
    match->ff.attach(cmd);
    cmd->add_option("--radius", match->radius, "Query-side neighborhood radius")
        ->capture_default_str();
    cmd->add_option("--alpha", match->alpha, "Region/interface trade-off")
        ->capture_default_str();
    cmd->add_option("--sigma1", match->sigma1,
                    "Pairwise spatial bandwidth (0: derive from the query)")
        ->capture_default_str();
    cmd->add_option("--mode", match->mode,
                    "Region term: quadratic, projected-asym, projected")
        ->capture_default_str();
    cmd->add_flag("--no-rescale", match->no_rescale,
                  "Compare cross-scale coordinates without radius adjustment");
    cmd->add_option("--scales", match->scales, "Library-side radii")
        ->delimiter(',');
    cmd->add_flag("--per-scale", match->per_scale,
                  "Run an independent search per library radius");
    cmd->add_option("--iters", match->iterations, "Refinement sweeps")
        ->capture_default_str();
    cmd->add_option("--runs", match->runs, "Independent search processes")
        ->capture_default_str();
    cmd->add_option("--seed", match->seed, "Base seed")->capture_default_str();
    cmd->add_flag("--exhaustive", match->exhaustive, "Full enumeration instead");
    cmd->add_option("--k", match->k,
                    "Keep top-k (exhaustive) or first k runs (randomized)");
    cmd->add_option("--threads", match->threads, "Worker threads")
        ->capture_default_str();
    cmd->callback([match] { run_match(*match); });

    auto label = std::make_shared<LabelArgs>();
    cmd = app.add_subcommand("label", "Fuse match classes into a labeling");
    cmd->add_option("--image", label->image, "Query RGB PNG")->required();
    cmd->add_option("--labels", label->labels, "Query label PNG")->required();
    cmd->add_option("--library", label->library, "Library manifest JSON")->required();
    cmd->add_option("--matches", label->matches, "Matches CSV")->required();
    cmd->add_option("--out", label->out, "Output class map PNG")->required();
    cmd->add_option("--sidecar", label->sidecar,
                    "Class-name JSON (default: <out>.json)");
    cmd->add_option("--names", label->names, "Class names by index")->delimiter(',');
    cmd->callback([label] { run_label(*label); });

    auto eval_args = std::make_shared<EvalArgs>();
    cmd = app.add_subcommand("eval", "Score a predicted class map");
    cmd->add_option("--pred", eval_args->pred, "Predicted class map PNG")->required();
    cmd->add_option("--gt", eval_args->gt, "Ground-truth class map PNG")->required();
    cmd->add_option("--labels", eval_args->labels, "Superpixel label PNG")->required();
    cmd->callback([eval_args] { run_eval(*eval_args); });

    CLI::App* viz = app.add_subcommand("viz", "Render diagnostics");
    viz->require_subcommand(1);
    auto viz_flow = std::make_shared<VizFlowArgs>();
    cmd = viz->add_subcommand("flow", "Match displacements on the flow color wheel");
    cmd->add_option("--image", viz_flow->image, "Query RGB PNG")->required();
    cmd->add_option("--labels", viz_flow->labels, "Query label PNG")->required();
    cmd->add_option("--library", viz_flow->library, "Library manifest JSON")->required();
    cmd->add_option("--matches", viz_flow->matches, "Matches CSV")->required();
    cmd->add_option("--out", viz_flow->out, "Output PNG")->required();
    cmd->callback([viz_flow] { run_viz_flow(*viz_flow); });

    auto viz_labels = std::make_shared<VizLabelsArgs>();
    cmd = viz->add_subcommand("labels", "Class overlay with accuracy annotation");
    cmd->add_option("--image", viz_labels->image, "RGB PNG")->required();
    cmd->add_option("--labels", viz_labels->labels, "Superpixel label PNG")->required();
    cmd->add_option("--pred", viz_labels->pred, "Predicted class map PNG")->required();
    cmd->add_option("--gt", viz_labels->gt, "Ground-truth class map (for the annotation)");
    cmd->add_option("--out", viz_labels->out, "Output PNG")->required();
    cmd->callback([viz_labels] { run_viz_labels(*viz_labels); });

    CLI::App* synth = app.add_subcommand("synth", "Generate synthetic benchmarks");
    synth->require_subcommand(1);
    auto textures = std::make_shared<SynthTexturesArgs>();
    cmd = synth->add_subcommand("textures", "Oriented-stripe mosaic pair");
    cmd->add_option("--size", textures->size, "Image side in pixels")
        ->capture_default_str();
    cmd->add_option("--grid", textures->grid, "Tiles per side")->capture_default_str();
    cmd->add_option("--seed", textures->seed, "Seed")->capture_default_str();
    cmd->add_option("--out-dir", textures->out_dir, "Output directory")->required();
    cmd->callback([textures] { run_synth_textures(*textures); });

    auto noise = std::make_shared<SynthNoiseArgs>();
    cmd = synth->add_subcommand("noise", "Add clamped Gaussian noise");
    cmd->add_option("--image", noise->image, "Input RGB PNG")->required();
    cmd->add_option("--variance", noise->variance, "Noise variance")
        ->capture_default_str();
    cmd->add_option("--seed", noise->seed, "Seed")->capture_default_str();
    cmd->add_option("--out", noise->out, "Output PNG")->required();
    cmd->callback([noise] { run_synth_noise(*noise); });

    auto scene = std::make_shared<SynthSceneArgs>();
    cmd = synth->add_subcommand("scene", "Structured matching benchmark scene");
    cmd->add_option("--width", scene->width, "Width")->capture_default_str();
    cmd->add_option("--height", scene->height, "Height")->capture_default_str();
    cmd->add_option("--seed", scene->seed, "Seed")->capture_default_str();
    cmd->add_option("--out", scene->out, "Output PNG")->required();
    cmd->callback([scene] { run_synth_scene(*scene); });

    auto faces = std::make_shared<SynthFacesArgs>();
    cmd = synth->add_subcommand("faces", "Labeled portrait-like scenes");
    cmd->add_option("--width", faces->width, "Width")->capture_default_str();
    cmd->add_option("--height", faces->height, "Height")->capture_default_str();
    cmd->add_option("--seed", faces->seed, "Base seed (scene i uses seed+i)")
        ->capture_default_str();
    cmd->add_option("--count", faces->count, "Number of scenes")
        ->capture_default_str();
    cmd->add_option("--k", faces->k,
                    "Also decompose each scene into this many superpixels");
    cmd->add_option("--out-dir", faces->out_dir, "Output directory")->required();
    cmd->callback([faces] { run_synth_faces(*faces); });

    auto scaled = std::make_shared<SynthScaledArgs>();
    cmd = synth->add_subcommand("scaled-library", "Randomly resampled library copies");
    cmd->add_option("--library", scaled->library, "Library manifest JSON")->required();
    cmd->add_option("--factors", scaled->factors, "Candidate scale factors")
        ->delimiter(',');
    cmd->add_option("--seed", scaled->seed, "Seed")->capture_default_str();
    cmd->add_option("--out-dir", scaled->out_dir, "Output directory")->required();
    cmd->callback([scaled] { run_synth_scaled(*scaled); });

    CLI::App* sweep = app.add_subcommand("sweep", "Emit CSV parameter tables");
    sweep->require_subcommand(1);
    auto attach_pair = [](CLI::App* c, std::shared_ptr<SweepPairArgs> a,
                          const char* value_name, const char* value_help) {
        c->add_option("--image", a->image, "Image decomposed twice")->required();
        c->add_option("--labels-a", a->labels_a, "First label PNG")->required();
        c->add_option("--labels-b", a->labels_b, "Second label PNG")->required();
        c->add_option(value_name, a->values, value_help)
            ->required()
            ->delimiter(',');
        c->add_option("--out", a->out, "Output CSV (default: stdout)");
        a->ff.attach(c);
        c->add_option("--radius", a->radius, "Fixed radius (alpha sweep)")
            ->capture_default_str();
        c->add_option("--alpha", a->alpha, "Fixed alpha (radius sweep)")
            ->capture_default_str();
        c->add_option("--mode", a->mode, "Region term")->capture_default_str();
        c->add_flag("!--randomized", a->exhaustive,
                    "Use the randomized search instead of enumeration");
        c->add_option("--iters", a->iterations, "Refinement sweeps")
            ->capture_default_str();
        c->add_option("--runs", a->runs, "Search processes (randomized)")
            ->capture_default_str();
        c->add_option("--seed", a->seed, "Seed")->capture_default_str();
        c->add_option("--threads", a->threads, "Worker threads")
            ->capture_default_str();
    };
    auto sweep_radius = std::make_shared<SweepPairArgs>();
    cmd = sweep->add_subcommand("radius", "Displacement across neighborhood radii");
    attach_pair(cmd, sweep_radius, "--radii", "Radii to evaluate");
    cmd->callback([sweep_radius] { run_sweep_pair(*sweep_radius, true); });

    auto sweep_alpha = std::make_shared<SweepPairArgs>();
    cmd = sweep->add_subcommand("alpha", "Displacement across trade-off values");
    attach_pair(cmd, sweep_alpha, "--alphas", "Alpha values to evaluate");
    cmd->callback([sweep_alpha] { run_sweep_pair(*sweep_alpha, false); });

    auto sweep_scales = std::make_shared<SweepScalesArgs>();
    cmd = sweep->add_subcommand("scales",
                                "Labeling accuracy across library-side radii");
    cmd->add_option("--image", sweep_scales->image, "Query RGB PNG")->required();
    cmd->add_option("--labels", sweep_scales->labels, "Query label PNG")->required();
    cmd->add_option("--classes", sweep_scales->classes, "Query ground-truth classes")
        ->required();
    cmd->add_option("--library", sweep_scales->library, "Library manifest JSON")
        ->required();
    cmd->add_option("--out", sweep_scales->out, "Output CSV (default: stdout)");
    sweep_scales->ff.attach(cmd);
    cmd->add_option("--scales", sweep_scales->scales, "Library-side radii")
        ->delimiter(',');
    cmd->add_option("--radius", sweep_scales->radius, "Query-side radius")
        ->capture_default_str();
    cmd->add_option("--alpha", sweep_scales->alpha, "Region/interface trade-off")
        ->capture_default_str();
    cmd->add_option("--k", sweep_scales->k, "Matches kept per (superpixel, scale)")
        ->capture_default_str();
    cmd->add_option("--seed", sweep_scales->seed, "Seed")->capture_default_str();
    cmd->add_option("--threads", sweep_scales->threads, "Worker threads")
        ->capture_default_str();
    cmd->callback([sweep_scales] { run_sweep_scales(*sweep_scales); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const dspm::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code();
    }
    return 0;
}
