#include "dspm/match.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <thread>

#include "dspm/error.hpp"
#include "dspm/rng.hpp"

namespace dspm {

namespace {

// Run fn(0..n-1) on up to `threads` workers; job order is arbitrary but
// each index runs exactly once, so writes to per-index slots are
// deterministic.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (std::thread& t : pool) t.join();
}

}  // namespace

MatchEngine::MatchEngine(const Decomposition& query, const FeatureTable& query_feats,
                         std::vector<LibraryImage> library, const SearchConfig& cfg)
    : a_(query), fa_(query_feats), lib_(std::move(library)), cfg_(cfg) {
    if (lib_.empty()) fail(ErrorKind::BadParameter, "empty match library");
    if (cfg_.iterations < 1) fail(ErrorKind::BadParameter, "iterations must be >= 1");
    if (cfg_.runs < 1) fail(ErrorKind::BadParameter, "runs must be >= 1");
    if (cfg_.scales.source_radius <= 0.0 || cfg_.scales.library_radii.empty())
        fail(ErrorKind::BadParameter, "invalid scale set");
    for (double r : cfg_.scales.library_radii)
        if (r <= 0.0) fail(ErrorKind::BadParameter, "library radius must be positive");
    cfg_.dist.radius = cfg_.scales.source_radius;
    if (cfg_.dist.sigma1 <= 0.0) cfg_.dist.sigma1 = a_.sigma1();

    query_dsps_.reserve(static_cast<std::size_t>(a_.k));
    for (std::int32_t id = 0; id < a_.k; ++id)
        query_dsps_.push_back(build_dsp(a_, fa_, id, cfg_.scales.source_radius));

    const int n_scales = static_cast<int>(cfg_.scales.library_radii.size());
    lib_dsps_.resize(lib_.size());
    diagonal_.resize(lib_.size());
    spacing_.resize(lib_.size());
    parallel_for(static_cast<int>(lib_.size()), cfg_.threads, [&](int img) {
        const Decomposition& d = *lib_[img].decomp;
        diagonal_[img] = std::hypot(static_cast<double>(d.width),
                                    static_cast<double>(d.height));
        spacing_[img] = d.mean_spacing();
        lib_dsps_[img].resize(n_scales);
        for (int s = 0; s < n_scales; ++s) {
            lib_dsps_[img][s].reserve(static_cast<std::size_t>(d.k));
            for (std::int32_t id = 0; id < d.k; ++id)
                lib_dsps_[img][s].push_back(
                    build_dsp(d, *lib_[img].feats, id, cfg_.scales.library_radii[s]));
        }
    });

    // Sweep order: barycenters in raster order (top-to-bottom, then
    // left-to-right), ids breaking exact ties.
    sweep_order_.resize(static_cast<std::size_t>(a_.k));
    for (std::int32_t id = 0; id < a_.k; ++id) sweep_order_[id] = id;
    std::sort(sweep_order_.begin(), sweep_order_.end(),
              [&](std::int32_t lhs, std::int32_t rhs) {
                  const Vec2& bl = a_.barycenters[lhs];
                  const Vec2& br = a_.barycenters[rhs];
                  if (bl.y != br.y) return bl.y < br.y;
                  if (bl.x != br.x) return bl.x < br.x;
                  return lhs < rhs;
              });
    sweep_rank_.resize(static_cast<std::size_t>(a_.k));
    for (int i = 0; i < a_.k; ++i) sweep_rank_[sweep_order_[i]] = i;
}

double MatchEngine::evaluate(std::int32_t src, int image, int scale_index,
                             std::int32_t sp) const {
    return distance_dual(query_dsps_[src], lib_dsps_[image][scale_index][sp], a_, fa_,
                         *lib_[image].decomp, *lib_[image].feats, cfg_.dist)
        .value;
}

std::vector<MatchRecord> MatchEngine::exhaustive(int k) const {
    if (k < 1) fail(ErrorKind::BadParameter, "exhaustive top-k needs k >= 1");
    const int n_scales = static_cast<int>(cfg_.scales.library_radii.size());
    std::vector<std::vector<MatchRecord>> per_src(static_cast<std::size_t>(a_.k));

    parallel_for(a_.k, cfg_.threads, [&](int src) {
        std::vector<MatchRecord>& out = per_src[src];
        for (int s = 0; s < n_scales; ++s) {
            // All candidates at this scale, ranked by (distance, image, sp).
            std::vector<MatchRecord> ranked;
            for (int img = 0; img < static_cast<int>(lib_.size()); ++img) {
                for (std::int32_t sp = 0; sp < lib_[img].decomp->k; ++sp) {
                    ranked.push_back({static_cast<std::int32_t>(src), 0, img, sp,
                                      cfg_.scales.library_radii[s],
                                      evaluate(src, img, s, sp)});
                }
            }
            const std::size_t keep = std::min<std::size_t>(k, ranked.size());
            std::partial_sort(ranked.begin(), ranked.begin() + keep, ranked.end(),
                              [](const MatchRecord& lhs, const MatchRecord& rhs) {
                                  if (lhs.distance != rhs.distance)
                                      return lhs.distance < rhs.distance;
                                  if (lhs.lib_image != rhs.lib_image)
                                      return lhs.lib_image < rhs.lib_image;
                                  return lhs.lib_sp < rhs.lib_sp;
                              });
            for (std::size_t rank = 0; rank < keep; ++rank) {
                ranked[rank].run = static_cast<std::int32_t>(rank);
                out.push_back(ranked[rank]);
            }
        }
    });

    std::vector<MatchRecord> out;
    for (const std::vector<MatchRecord>& rows : per_src)
        out.insert(out.end(), rows.begin(), rows.end());
    return out;
}

std::vector<MatchRecord> MatchEngine::run_scaled(
    int run, std::uint64_t stream, int fixed_scale,
    std::vector<std::vector<double>>* trace) const {
    const int n_images = static_cast<int>(lib_.size());
    const int n_scales = static_cast<int>(cfg_.scales.library_radii.size());
    const double r_a = cfg_.scales.source_radius;
    Rng rng(cfg_.seed + stream);

    struct Best {
        int image;
        int scale;
        std::int32_t sp;
        double dist;
    };
    std::vector<Best> best(static_cast<std::size_t>(a_.k));

    const auto pick_scale = [&]() {
        return fixed_scale >= 0 ? fixed_scale
                                : static_cast<int>(rng.uniform_below(
                                      static_cast<std::uint64_t>(n_scales)));
    };

    for (std::int32_t src = 0; src < a_.k; ++src) {
        const int img = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n_images)));
        const std::int32_t sp = static_cast<std::int32_t>(
            rng.uniform_below(static_cast<std::uint64_t>(lib_[img].decomp->k)));
        const int s = pick_scale();
        best[src] = {img, s, sp, evaluate(src, img, s, sp)};
    }

    const auto consider = [&](std::int32_t src, int img, int s, std::int32_t sp) {
        Best& b = best[src];
        if (img == b.image && s == b.scale && sp == b.sp) return;
        const double d = evaluate(src, img, s, sp);
        if (d < b.dist) b = {img, s, sp, d};
    };

    for (int iter = 0; iter < cfg_.iterations; ++iter) {
        const bool reversed = (iter % 2) == 1;
        for (int step = 0; step < a_.k; ++step) {
            const std::int32_t src =
                sweep_order_[reversed ? a_.k - 1 - step : step];
            const int my_rank = reversed ? a_.k - 1 - sweep_rank_[src] : sweep_rank_[src];

            // Propagation: shift each already-processed neighbor's match
            // by the neighbors' relative barycenter offset, scaled into
            // the match's own radius.
            for (std::int32_t nb : a_.adjacency[src]) {
                const int nb_rank =
                    reversed ? a_.k - 1 - sweep_rank_[nb] : sweep_rank_[nb];
                if (nb_rank >= my_rank) continue;
                const Best& t = best[nb];
                const double rho = cfg_.scales.library_radii[t.scale] / r_a;
                const Vec2 x_t = lib_[t.image].decomp->barycenters[t.sp];
                const Vec2 shift = a_.barycenters[src] - a_.barycenters[nb];
                const std::int32_t sp = lib_[t.image].decomp->superpixel_at(
                    x_t.x + rho * shift.x, x_t.y + rho * shift.y);
                consider(src, t.image, t.scale, sp);
            }

            // Random search: shrinking windows around the current best.
            for (double w = diagonal_[best[src].image]; w >= spacing_[best[src].image];
                 w *= 0.5) {
                const Best& b = best[src];
                const Vec2 c = lib_[b.image].decomp->barycenters[b.sp];
                const double x = c.x + rng.uniform(-w, w);
                const double y = c.y + rng.uniform(-w, w);
                const std::int32_t sp = lib_[b.image].decomp->superpixel_at(x, y);
                consider(src, b.image, pick_scale(), sp);
            }
        }
        if (trace) {
            std::vector<double> row(static_cast<std::size_t>(a_.k));
            for (std::int32_t src = 0; src < a_.k; ++src) row[src] = best[src].dist;
            trace->push_back(std::move(row));
        }
    }

    std::vector<MatchRecord> out;
    out.reserve(static_cast<std::size_t>(a_.k));
    for (std::int32_t src = 0; src < a_.k; ++src) {
        out.push_back({src, run, best[src].image, best[src].sp,
                       cfg_.scales.library_radii[best[src].scale], best[src].dist});
    }
    return out;
}

std::vector<MatchRecord> MatchEngine::run_single(
    int run, std::vector<std::vector<double>>* iteration_trace) const {
    return run_scaled(run, static_cast<std::uint64_t>(run), -1, iteration_trace);
}

std::vector<MatchRecord> MatchEngine::dspm() const {
    const int n_scales = static_cast<int>(cfg_.scales.library_radii.size());
    const int jobs = cfg_.per_scale ? cfg_.runs * n_scales : cfg_.runs;
    std::vector<std::vector<MatchRecord>> slots(static_cast<std::size_t>(jobs));
    parallel_for(jobs, cfg_.threads, [&](int job) {
        if (cfg_.per_scale) {
            slots[job] = run_scaled(job % cfg_.runs, static_cast<std::uint64_t>(job),
                                    job / cfg_.runs, nullptr);
        } else {
            slots[job] = run_scaled(job, static_cast<std::uint64_t>(job), -1, nullptr);
        }
    });
    std::vector<MatchRecord> out;
    out.reserve(static_cast<std::size_t>(jobs) * a_.k);
    for (const std::vector<MatchRecord>& rows : slots)
        out.insert(out.end(), rows.begin(), rows.end());
    return out;
}

std::vector<MatchRecord> knn_collect(const std::vector<MatchRecord>& records, int k) {
    if (k < 1) fail(ErrorKind::BadParameter, "k must be >= 1");
    std::vector<MatchRecord> out;
    for (const MatchRecord& r : records)
        if (r.run < k) out.push_back(r);
    return out;
}

void write_matches_csv(const std::string& path, std::vector<MatchRecord> records) {
    std::sort(records.begin(), records.end(),
              [](const MatchRecord& lhs, const MatchRecord& rhs) {
                  if (lhs.src != rhs.src) return lhs.src < rhs.src;
                  if (lhs.run != rhs.run) return lhs.run < rhs.run;
                  if (lhs.scale != rhs.scale) return lhs.scale < rhs.scale;
                  if (lhs.lib_image != rhs.lib_image) return lhs.lib_image < rhs.lib_image;
                  return lhs.lib_sp < rhs.lib_sp;
              });
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) fail(ErrorKind::MissingFile, "cannot write " + path);
    std::fputs("src_sp,run,lib_image,lib_sp,scale,distance\n", f);
    for (const MatchRecord& r : records)
        std::fprintf(f, "%d,%d,%d,%d,%g,%.6f\n", r.src, r.run, r.lib_image, r.lib_sp,
                     r.scale, r.distance);
    if (std::fclose(f) != 0) fail(ErrorKind::MissingFile, "failed writing " + path);
}

std::vector<MatchRecord> read_matches_csv(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) fail(ErrorKind::MissingFile, "cannot open " + path);
    struct Closer {
        std::FILE* f;
        ~Closer() { std::fclose(f); }
    } closer{f};

    char line[512];
    if (!std::fgets(line, sizeof line, f) ||
        std::strncmp(line, "src_sp,run,lib_image,lib_sp,scale,distance", 42) != 0)
        fail(ErrorKind::FormatViolation, "bad match file header: " + path);
    std::vector<MatchRecord> out;
    while (std::fgets(line, sizeof line, f)) {
        MatchRecord r;
        if (std::sscanf(line, "%d,%d,%d,%d,%lf,%lf", &r.src, &r.run, &r.lib_image,
                        &r.lib_sp, &r.scale, &r.distance) != 6)
            fail(ErrorKind::FormatViolation, "bad match row in " + path + ": " + line);
        out.push_back(r);
    }
    return out;
}

}  // namespace dspm
