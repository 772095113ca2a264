// Python bindings for the core pipeline: decomposition, descriptors,
// correspondence search, label transfer, and the synthetic generators.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "dspm/decomp.hpp"
#include "dspm/dist.hpp"
#include "dspm/error.hpp"
#include "dspm/features.hpp"
#include "dspm/label.hpp"
#include "dspm/match.hpp"
#include "dspm/synth.hpp"
#include "dspm/viz.hpp"

namespace py = pybind11;

namespace {

using CArrayU8 = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using CArrayI32 = py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>;

dspm::RgbImage to_image(const py::array_t<std::uint8_t>& arr) {
    if (arr.ndim() != 3 || arr.shape(2) != 3)
        throw py::value_error("expected an (H, W, 3) uint8 array");
    const CArrayU8 c = CArrayU8::ensure(arr);
    dspm::RgbImage img(static_cast<int>(c.shape(1)), static_cast<int>(c.shape(0)));
    std::memcpy(img.pixels.data(), c.data(), img.pixels.size());
    return img;
}

py::array_t<std::uint8_t> from_image(const dspm::RgbImage& img) {
    py::array_t<std::uint8_t> arr({img.height, img.width, 3});
    std::memcpy(arr.mutable_data(), img.pixels.data(), img.pixels.size());
    return arr;
}

std::vector<std::int32_t> to_labels(const py::array_t<std::int32_t>& arr,
                                    int& width, int& height) {
    if (arr.ndim() != 2) throw py::value_error("expected an (H, W) int32 array");
    const CArrayI32 c = CArrayI32::ensure(arr);
    height = static_cast<int>(c.shape(0));
    width = static_cast<int>(c.shape(1));
    std::vector<std::int32_t> labels(static_cast<std::size_t>(width) * height);
    std::memcpy(labels.data(), c.data(), labels.size() * sizeof(std::int32_t));
    return labels;
}

py::array_t<std::int32_t> from_labels(const std::vector<std::int32_t>& labels,
                                      int width, int height) {
    py::array_t<std::int32_t> arr({height, width});
    std::memcpy(arr.mutable_data(), labels.data(),
                labels.size() * sizeof(std::int32_t));
    return arr;
}

dspm::ClassMap to_class_map(const py::array_t<std::int32_t>& arr) {
    dspm::ClassMap m;
    m.classes = to_labels(arr, m.width, m.height);
    std::int32_t max_cls = 0;
    for (std::int32_t v : m.classes) {
        if (v < 0) throw py::value_error("class values must be non-negative");
        max_cls = std::max(max_cls, v);
    }
    m.num_classes = max_cls + 1;
    return m;
}

dspm::FeatureConfig make_feature_config(int beta, const std::string& kind,
                                        int window, int hog_bins, int min_spacing) {
    dspm::FeatureConfig cfg;
    cfg.beta = beta;
    if (kind == "mean-rgb") {
        cfg.region_kind = dspm::RegionFeatureKind::MeanRgb;
    } else if (kind == "cumulative-rgb-hist-9") {
        cfg.region_kind = dspm::RegionFeatureKind::CumulativeRgbHist9;
    } else if (kind == "hog") {
        cfg.region_kind = dspm::RegionFeatureKind::Hog;
    } else {
        throw py::value_error("unknown region feature kind: " + kind);
    }
    cfg.interface_window = window;
    cfg.hog_bins = hog_bins;
    cfg.interface_min_spacing = min_spacing;
    return cfg;
}

dspm::SearchConfig make_search_config(double radius, std::vector<double> scales,
                                      double alpha, double sigma1,
                                      const std::string& mode, bool rescale,
                                      int iterations, int runs, std::uint64_t seed,
                                      bool per_scale, int threads) {
    dspm::SearchConfig cfg;
    cfg.iterations = iterations;
    cfg.runs = runs;
    cfg.seed = seed;
    cfg.scales.source_radius = radius;
    cfg.scales.library_radii = scales.empty() ? std::vector<double>{radius}
                                              : std::move(scales);
    cfg.dist.alpha = alpha;
    cfg.dist.sigma1 = sigma1;
    cfg.dist.radius = radius;
    cfg.dist.rescale = rescale;
    if (mode == "quadratic") {
        cfg.dist.mode = dspm::DistanceMode::Quadratic;
    } else if (mode == "projected-asym") {
        cfg.dist.mode = dspm::DistanceMode::ProjectedAsym;
    } else if (mode == "projected") {
        cfg.dist.mode = dspm::DistanceMode::Projected;
    } else {
        throw py::value_error("unknown distance mode: " + mode);
    }
    cfg.per_scale = per_scale;
    cfg.threads = threads;
    return cfg;
}

py::array_t<double> records_to_array(const std::vector<dspm::MatchRecord>& records) {
    py::array_t<double> arr({static_cast<py::ssize_t>(records.size()),
                             static_cast<py::ssize_t>(6)});
    auto view = arr.mutable_unchecked<2>();
    for (std::size_t i = 0; i < records.size(); ++i) {
        view(i, 0) = records[i].src;
        view(i, 1) = records[i].run;
        view(i, 2) = records[i].lib_image;
        view(i, 3) = records[i].lib_sp;
        view(i, 4) = records[i].scale;
        view(i, 5) = records[i].distance;
    }
    return arr;
}

std::vector<dspm::MatchRecord> array_to_records(const py::array_t<double>& arr) {
    if (arr.ndim() != 2 || arr.shape(1) != 6)
        throw py::value_error("expected an (N, 6) match-record array");
    auto view = arr.unchecked<2>();
    std::vector<dspm::MatchRecord> records(static_cast<std::size_t>(arr.shape(0)));
    for (py::ssize_t i = 0; i < arr.shape(0); ++i) {
        records[i].src = static_cast<std::int32_t>(view(i, 0));
        records[i].run = static_cast<std::int32_t>(view(i, 1));
        records[i].lib_image = static_cast<std::int32_t>(view(i, 2));
        records[i].lib_sp = static_cast<std::int32_t>(view(i, 3));
        records[i].scale = view(i, 4);
        records[i].distance = view(i, 5);
    }
    return records;
}

// Bundles an owned decomposition + descriptor table per image so the
// match engine's borrowed pointers stay valid for the call.
struct PreparedImage {
    dspm::Decomposition decomp;
    dspm::FeatureTable feats;
};

PreparedImage prepare(const py::array_t<std::uint8_t>& image,
                      const py::array_t<std::int32_t>& labels,
                      const dspm::FeatureConfig& cfg) {
    const dspm::RgbImage img = to_image(image);
    int w = 0, h = 0;
    std::vector<std::int32_t> raw = to_labels(labels, w, h);
    if (w != img.width || h != img.height)
        throw py::value_error("image and label dimensions differ");
    PreparedImage p;
    p.decomp = dspm::build_decomposition(w, h, std::move(raw));
    p.feats = dspm::compute_features(img, p.decomp, cfg);
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Superpixel-neighborhood matching and label transfer";

    py::register_exception<dspm::Error>(m, "PipelineError");

    m.def(
        "slic",
        [](const py::array_t<std::uint8_t>& image, int k, double compactness,
           std::uint64_t seed, int iterations) {
            const dspm::RgbImage img = to_image(image);
            const dspm::Decomposition d =
                dspm::generate_slic(img, k, compactness, seed, iterations);
            return from_labels(d.labels, d.width, d.height);
        },
        py::arg("image"), py::arg("k"), py::arg("compactness") = 10.0,
        py::arg("seed") = 0, py::arg("iterations") = 10,
        "Segment an RGB image into ~k compact superpixels; returns (H, W) int32 labels.");

    m.def(
        "match",
        [](const py::array_t<std::uint8_t>& query_image,
           const py::array_t<std::int32_t>& query_labels,
           const std::vector<std::pair<py::array_t<std::uint8_t>,
                                       py::array_t<std::int32_t>>>& library,
           double radius, std::vector<double> scales, double alpha, double sigma1,
           const std::string& mode, bool rescale, int beta,
           const std::string& feature, bool exhaustive, int k, int iterations,
           int runs, std::uint64_t seed, bool per_scale, int threads) {
            const dspm::FeatureConfig fcfg =
                make_feature_config(beta, feature, 9, 9, 4);
            const PreparedImage query = prepare(query_image, query_labels, fcfg);
            std::vector<PreparedImage> lib;
            lib.reserve(library.size());
            for (const auto& [img, lab] : library)
                lib.push_back(prepare(img, lab, fcfg));
            std::vector<dspm::LibraryImage> views;
            for (const PreparedImage& p : lib) views.push_back({&p.decomp, &p.feats});
            const dspm::SearchConfig cfg = make_search_config(
                radius, std::move(scales), alpha, sigma1, mode, rescale,
                iterations, runs, seed, per_scale, threads);
            const dspm::MatchEngine engine(query.decomp, query.feats, views, cfg);
            std::vector<dspm::MatchRecord> records =
                exhaustive ? engine.exhaustive(k > 0 ? k : 1) : engine.dspm();
            if (!exhaustive && k > 0) records = dspm::knn_collect(records, k);
            return records_to_array(records);
        },
        py::arg("query_image"), py::arg("query_labels"), py::arg("library"),
        py::arg("radius") = 50.0, py::arg("scales") = std::vector<double>{},
        py::arg("alpha") = 0.5, py::arg("sigma1") = 0.0,
        py::arg("mode") = "projected", py::arg("rescale") = true,
        py::arg("beta") = 1, py::arg("feature") = "cumulative-rgb-hist-9",
        py::arg("exhaustive") = false, py::arg("k") = 0, py::arg("iterations") = 5,
        py::arg("runs") = 50, py::arg("seed") = 0, py::arg("per_scale") = false,
        py::arg("threads") = 1,
        "Match query superpixels into a library of (image, labels) pairs.\n"
        "Returns an (N, 6) array with columns src, run, lib_image, lib_sp, "
        "scale, distance.");

    m.def(
        "transfer_labels",
        [](const py::array_t<double>& records,
           const std::vector<std::pair<py::array_t<std::int32_t>,
                                       py::array_t<std::int32_t>>>& lib_annotations,
           int query_superpixels) {
            std::vector<std::vector<std::int32_t>> lib_classes;
            int num_classes = 0;
            for (const auto& [labels, classes] : lib_annotations) {
                int w = 0, h = 0;
                const dspm::Decomposition d =
                    dspm::build_decomposition(w, h, to_labels(labels, w, h));
                const dspm::ClassMap cm = to_class_map(classes);
                num_classes = std::max(num_classes, cm.num_classes);
                lib_classes.push_back(dspm::majority_classes(d, cm));
            }
            const dspm::LabelScores scores =
                dspm::fuse_labels(array_to_records(records), lib_classes,
                                  num_classes, query_superpixels);
            return dspm::decide_labels(scores);
        },
        py::arg("records"), py::arg("lib_annotations"), py::arg("query_superpixels"),
        "Fuse match records against library (labels, classes) annotations into "
        "one class per query superpixel.");

    m.def(
        "evaluate",
        [](const std::vector<std::int32_t>& predictions,
           const py::array_t<std::int32_t>& gt,
           const py::array_t<std::int32_t>& labels) {
            int w = 0, h = 0;
            const dspm::Decomposition d =
                dspm::build_decomposition(w, h, to_labels(labels, w, h));
            const dspm::Accuracy acc =
                dspm::evaluate(predictions, to_class_map(gt), d);
            return py::make_tuple(acc.superpixel_accuracy, acc.pixel_accuracy);
        },
        py::arg("predictions"), py::arg("gt"), py::arg("labels"),
        "Score per-superpixel predictions; returns (superpixel_accuracy, "
        "pixel_accuracy).");

    m.def(
        "majority_classes",
        [](const py::array_t<std::int32_t>& labels,
           const py::array_t<std::int32_t>& classes) {
            int w = 0, h = 0;
            const dspm::Decomposition d =
                dspm::build_decomposition(w, h, to_labels(labels, w, h));
            return dspm::majority_classes(d, to_class_map(classes));
        },
        py::arg("labels"), py::arg("classes"),
        "Most frequent class per superpixel (ties to the lowest class).");

    m.def(
        "gen_textures",
        [](int size, std::uint64_t seed, int grid) {
            const dspm::TexturePair p =
                dspm::gen_textures(size, seed, grid, grid * grid);
            return py::make_tuple(
                from_image(p.image_a), from_image(p.image_b),
                from_labels(p.tiles_a.labels, p.tiles_a.width, p.tiles_a.height),
                from_labels(p.tiles_b.labels, p.tiles_b.width, p.tiles_b.height),
                p.angle_a, p.angle_b);
        },
        py::arg("size") = 256, py::arg("seed") = 0, py::arg("grid") = 4,
        "Oriented-stripe mosaic pair: (image_a, image_b, labels_a, labels_b, "
        "angles_a, angles_b).");

    m.def(
        "add_noise",
        [](const py::array_t<std::uint8_t>& image, double variance,
           std::uint64_t seed) {
            return from_image(dspm::add_noise(to_image(image), variance, seed));
        },
        py::arg("image"), py::arg("variance"), py::arg("seed") = 0,
        "Clamped per-channel Gaussian noise (variance 0 returns the input).");

    m.def(
        "gen_test_scene",
        [](int width, int height, std::uint64_t seed) {
            return from_image(dspm::gen_test_scene(width, height, seed));
        },
        py::arg("width") = 250, py::arg("height") = 250, py::arg("seed") = 0,
        "Structured matching benchmark scene.");

    m.def(
        "gen_labeled_scene",
        [](int width, int height, std::uint64_t seed) {
            const dspm::LabeledScene s = dspm::gen_labeled_scene(width, height, seed);
            return py::make_tuple(from_image(s.image),
                                  from_labels(s.classes.classes, s.classes.width,
                                              s.classes.height));
        },
        py::arg("width") = 160, py::arg("height") = 160, py::arg("seed") = 0,
        "Portrait-like scene with classes 0=background, 1=skin, 2=hair; "
        "returns (image, classes).");

    m.def(
        "render_displacement",
        [](const py::array_t<std::int32_t>& query_labels,
           const py::array_t<double>& records,
           const std::vector<py::array_t<std::int32_t>>& library_labels) {
            int w = 0, h = 0;
            const dspm::Decomposition query =
                dspm::build_decomposition(w, h, to_labels(query_labels, w, h));
            std::vector<dspm::Decomposition> lib;
            for (const auto& arr : library_labels) {
                lib.push_back(dspm::build_decomposition(w, h, to_labels(arr, w, h)));
            }
            std::vector<const dspm::Decomposition*> views;
            for (const dspm::Decomposition& d : lib) views.push_back(&d);
            return from_image(
                dspm::render_displacement(query, array_to_records(records), views));
        },
        py::arg("query_labels"), py::arg("records"), py::arg("library_labels"),
        "Flow-wheel rendering of match displacements.");
}
