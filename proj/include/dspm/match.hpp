#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dspm/decomp.hpp"
#include "dspm/dist.hpp"
#include "dspm/dsp.hpp"
#include "dspm/features.hpp"

namespace dspm {

struct MatchRecord {
    std::int32_t src = 0;        // query superpixel id
    std::int32_t run = 0;        // search process index (rank for exhaustive top-k)
    std::int32_t lib_image = 0;  // index into the library
    std::int32_t lib_sp = 0;     // matched superpixel id
    double scale = 0.0;          // library-side radius the match was found at
    double distance = 0.0;
};

struct SearchConfig {
    int iterations = 5;
    int runs = 50;
    std::uint64_t seed = 0;
    ScaleSet scales;
    DistanceConfig dist;   // sigma1 <= 0 means: derive from the query image
    bool per_scale = false;  // run an independent search per library radius
    int threads = 1;
};

// One library entry; the engine borrows these, the caller keeps them alive.
struct LibraryImage {
    const Decomposition* decomp = nullptr;
    const FeatureTable* feats = nullptr;
};

// Correspondence search from one query image into a library. All
// superpatches are prebuilt at construction; searches are deterministic
// for a fixed seed regardless of `threads`.
class MatchEngine {
  public:
    MatchEngine(const Decomposition& query, const FeatureTable& query_feats,
                std::vector<LibraryImage> library, const SearchConfig& cfg);

    // Global top-k matches per (query superpixel, library radius) by full
    // enumeration; ties resolve to the lowest (image, superpixel) pair.
    // The rank is stored in the record's run field.
    std::vector<MatchRecord> exhaustive(int k = 1) const;

    // Randomized search: random initialization, then `iterations` sweeps
    // in barycenter raster order (reversed every pass) evaluating
    // propagation candidates from already-processed neighbors and random
    // candidates in halving windows around the current best. One final
    // record per (superpixel, run); per (superpixel, run, radius) when
    // per_scale is set. Run j draws from seed + j.
    std::vector<MatchRecord> dspm() const;

    // Single run for inspection: `iteration_trace`, when given, receives
    // one row per iteration with each superpixel's best distance after
    // that pass. per_scale is ignored here (joint-scale search).
    std::vector<MatchRecord> run_single(int run,
                                        std::vector<std::vector<double>>* iteration_trace
                                        = nullptr) const;

    const SearchConfig& config() const { return cfg_; }
    const DualSuperpatch& query_dsp(std::int32_t src) const { return query_dsps_[src]; }
    const DualSuperpatch& library_dsp(int image, int scale_index, std::int32_t sp) const {
        return lib_dsps_[image][scale_index][sp];
    }

  private:
    std::vector<MatchRecord> run_scaled(int run, std::uint64_t stream, int fixed_scale,
                                        std::vector<std::vector<double>>* trace) const;
    double evaluate(std::int32_t src, int image, int scale_index, std::int32_t sp) const;

    const Decomposition& a_;
    const FeatureTable& fa_;
    std::vector<LibraryImage> lib_;
    SearchConfig cfg_;
    std::vector<DualSuperpatch> query_dsps_;
    std::vector<std::vector<std::vector<DualSuperpatch>>> lib_dsps_;  // [image][scale][sp]
    std::vector<std::int32_t> sweep_order_;  // superpixels by barycenter raster order
    std::vector<int> sweep_rank_;            // inverse of sweep_order_
    std::vector<double> diagonal_;           // per library image
    std::vector<double> spacing_;            // per library image, sqrt(|I|/K)
};

// Keep only the records of the first k runs (runs are independent
// nearest-neighbor samples; duplicates across runs are retained).
std::vector<MatchRecord> knn_collect(const std::vector<MatchRecord>& records, int k);

// CSV round trip: header `src_sp,run,lib_image,lib_sp,scale,distance`,
// distance with 6 decimals, rows sorted by (src_sp, run).
void write_matches_csv(const std::string& path, std::vector<MatchRecord> records);
std::vector<MatchRecord> read_matches_csv(const std::string& path);

}  // namespace dspm
