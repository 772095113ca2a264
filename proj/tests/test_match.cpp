#include <doctest.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <vector>

#include "dspm/decomp.hpp"
#include "dspm/dist.hpp"
#include "dspm/error.hpp"
#include "dspm/match.hpp"
#include "dspm/rng.hpp"
#include "helpers.hpp"

using namespace dspm;
using testutil::random_table;
using testutil::random_voronoi;

namespace {

// Two-image library plus a query, all random voronoi maps with random
// features, sized so exhaustive search stays instant.
struct MatchFixture {
    Decomposition query;
    FeatureTable query_feats;
    std::vector<Decomposition> lib_decomps;
    std::vector<FeatureTable> lib_feats;

    explicit MatchFixture(std::uint64_t seed, int interfaces = 4) {
        Rng rng(seed);
        query = random_voronoi(rng, 48, 48, 10);
        query_feats = random_table(rng, query, 5, interfaces, 5);
        for (int i = 0; i < 2; ++i) {
            lib_decomps.push_back(random_voronoi(rng, 52, 46, 12));
            lib_feats.push_back(random_table(rng, lib_decomps.back(), 5, interfaces, 5));
        }
    }

    std::vector<LibraryImage> library() const {
        std::vector<LibraryImage> lib;
        for (std::size_t i = 0; i < lib_decomps.size(); ++i)
            lib.push_back({&lib_decomps[i], &lib_feats[i]});
        return lib;
    }
};

SearchConfig base_config(double radius = 16.0) {
    SearchConfig cfg;
    cfg.iterations = 5;
    cfg.runs = 4;
    cfg.seed = 99;
    cfg.scales.source_radius = radius;
    cfg.scales.library_radii = {radius};
    return cfg;
}

}  // namespace

TEST_SUITE("match") {

TEST_CASE("construction derives sigma1 from the query when unset") {
    const MatchFixture fx(1);
    SearchConfig cfg = base_config();
    cfg.dist.sigma1 = 0.0;
    const MatchEngine engine(fx.query, fx.query_feats, fx.library(), cfg);
    CHECK(engine.config().dist.sigma1 == doctest::Approx(fx.query.sigma1()).epsilon(1e-12));
    CHECK(engine.config().dist.radius == 16.0);

    SearchConfig explicit_cfg = base_config();
    explicit_cfg.dist.sigma1 = 3.25;
    const MatchEngine engine2(fx.query, fx.query_feats, fx.library(), explicit_cfg);
    CHECK(engine2.config().dist.sigma1 == 3.25);
}

TEST_CASE("invalid search configurations are rejected") {
    const MatchFixture fx(2);
    SearchConfig cfg = base_config();
    CHECK_THROWS_AS(MatchEngine(fx.query, fx.query_feats, {}, cfg), Error);
    cfg.iterations = 0;
    CHECK_THROWS_AS(MatchEngine(fx.query, fx.query_feats, fx.library(), cfg), Error);
    cfg = base_config();
    cfg.runs = 0;
    CHECK_THROWS_AS(MatchEngine(fx.query, fx.query_feats, fx.library(), cfg), Error);
    cfg = base_config();
    cfg.scales.library_radii = {16.0, -1.0};
    CHECK_THROWS_AS(MatchEngine(fx.query, fx.query_feats, fx.library(), cfg), Error);
    cfg = base_config();
    cfg.scales.source_radius = 0.0;
    CHECK_THROWS_AS(MatchEngine(fx.query, fx.query_feats, fx.library(), cfg), Error);
}

TEST_CASE("exhaustive matching agrees with a direct argmin over the dual distance") {
    const MatchFixture fx(3);
    const SearchConfig cfg = base_config();
    const MatchEngine engine(fx.query, fx.query_feats, fx.library(), cfg);
    const std::vector<MatchRecord> got = engine.exhaustive(1);
    REQUIRE(got.size() == static_cast<std::size_t>(fx.query.k));

    const DistanceConfig dist_cfg = engine.config().dist;
    for (const MatchRecord& r : got) {
        CHECK(r.run == 0);
        CHECK(r.scale == 16.0);
        // Re-derive the winner by brute force through the public distance.
        double best = 1e300;
        int best_img = -1;
        std::int32_t best_sp = -1;
        for (int img = 0; img < 2; ++img) {
            for (std::int32_t sp = 0; sp < fx.lib_decomps[img].k; ++sp) {
                const double d =
                    distance_dual(engine.query_dsp(r.src), engine.library_dsp(img, 0, sp),
                                  fx.query, fx.query_feats, fx.lib_decomps[img],
                                  fx.lib_feats[img], dist_cfg)
                        .value;
                if (d < best) {
                    best = d;
                    best_img = img;
                    best_sp = sp;
                }
            }
        }
        CHECK(r.lib_image == best_img);
        CHECK(r.lib_sp == best_sp);
        CHECK(r.distance == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("exhaustive ties resolve to the lowest image then superpixel") {
    // The same image twice: every distance duplicates, so image 0 wins.
    const MatchFixture fx(4);
    SearchConfig cfg = base_config();
    std::vector<LibraryImage> lib = {{&fx.lib_decomps[0], &fx.lib_feats[0]},
                                     {&fx.lib_decomps[0], &fx.lib_feats[0]}};
    const MatchEngine engine(fx.query, fx.query_feats, lib, cfg);
    for (const MatchRecord& r : engine.exhaustive(1)) CHECK(r.lib_image == 0);
}

TEST_CASE("exhaustive top-k ranks by ascending distance") {
    const MatchFixture fx(5);
    const MatchEngine engine(fx.query, fx.query_feats, fx.library(), base_config());
    const int k = 5;
    const std::vector<MatchRecord> got = engine.exhaustive(k);
    REQUIRE(got.size() == static_cast<std::size_t>(fx.query.k) * k);
    std::map<std::int32_t, std::vector<MatchRecord>> by_src;
    for (const MatchRecord& r : got) by_src[r.src].push_back(r);
    for (auto& [src, rows] : by_src) {
        REQUIRE(rows.size() == static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) CHECK(rows[i].run == i);
        for (int i = 1; i < k; ++i) CHECK(rows[i].distance >= rows[i - 1].distance);
        // Distinct candidates.
        std::set<std::pair<int, std::int32_t>> seen;
        for (const MatchRecord& r : rows) seen.insert({r.lib_image, r.lib_sp});
        CHECK(seen.size() == rows.size());
    }
}

TEST_CASE("a self-library exhaustive match is the identity at distance zero") {
    Rng rng(6);
    const Decomposition d = random_voronoi(rng, 50, 50, 10);
    const FeatureTable t = random_table(rng, d, 5, 4, 5);
    SearchConfig cfg = base_config(15.0);
    const MatchEngine engine(d, t, {{&d, &t}}, cfg);
    for (const MatchRecord& r : engine.exhaustive(1)) {
        CHECK(r.lib_sp == r.src);
        CHECK(r.distance == 0.0);
    }
}

TEST_CASE("randomized search returns one record per superpixel and run") {
    const MatchFixture fx(7);
    SearchConfig cfg = base_config();
    cfg.runs = 3;
    const MatchEngine engine(fx.query, fx.query_feats, fx.library(), cfg);
    const std::vector<MatchRecord> got = engine.dspm();
    REQUIRE(got.size() == static_cast<std::size_t>(fx.query.k) * 3);
    std::set<std::pair<std::int32_t, std::int32_t>> seen;
    for (const MatchRecord& r : got) {
        CHECK(seen.insert({r.src, r.run}).second);
        CHECK(r.run >= 0);
        CHECK(r.run < 3);
        CHECK(r.lib_image >= 0);
        CHECK(r.lib_image < 2);
        CHECK(r.lib_sp >= 0);
        CHECK(r.lib_sp < fx.lib_decomps[r.lib_image].k);
        CHECK(r.scale == 16.0);
        CHECK(std::isfinite(r.distance));
        CHECK(r.distance >= 0.0);
    }
}

TEST_CASE("the randomized search is deterministic and thread-independent") {
    const MatchFixture fx(8);
    SearchConfig cfg = base_config();
    cfg.runs = 4;
    cfg.threads = 1;
    const MatchEngine engine1(fx.query, fx.query_feats, fx.library(), cfg);
    cfg.threads = 4;
    const MatchEngine engine4(fx.query, fx.query_feats, fx.library(), cfg);
    const auto a = engine1.dspm();
    const auto b = engine1.dspm();
    const auto c = engine4.dspm();
    REQUIRE(a.size() == b.size());
    REQUIRE(a.size() == c.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].src == b[i].src);
        CHECK(a[i].lib_image == b[i].lib_image);
        CHECK(a[i].lib_sp == b[i].lib_sp);
        CHECK(a[i].distance == b[i].distance);
        CHECK(a[i].src == c[i].src);
        CHECK(a[i].lib_image == c[i].lib_image);
        CHECK(a[i].lib_sp == c[i].lib_sp);
        CHECK(a[i].distance == c[i].distance);
    }
}

TEST_CASE("a single run reproduces its slot of the batch") {
    const MatchFixture fx(9);
    SearchConfig cfg = base_config();
    cfg.runs = 3;
    const MatchEngine engine(fx.query, fx.query_feats, fx.library(), cfg);
    const auto all = engine.dspm();
    for (int run = 0; run < 3; ++run) {
        const auto single = engine.run_single(run);
        REQUIRE(single.size() == static_cast<std::size_t>(fx.query.k));
        for (const MatchRecord& s : single) {
            const auto it = std::find_if(all.begin(), all.end(), [&](const MatchRecord& r) {
                return r.src == s.src && r.run == run;
            });
            REQUIRE(it != all.end());
            CHECK(it->lib_image == s.lib_image);
            CHECK(it->lib_sp == s.lib_sp);
            CHECK(it->distance == s.distance);
        }
    }
}

TEST_CASE("per-iteration best distances never increase") {
    const MatchFixture fx(10);
    SearchConfig cfg = base_config();
    cfg.iterations = 6;
    const MatchEngine engine(fx.query, fx.query_feats, fx.library(), cfg);
    std::vector<std::vector<double>> trace;
    engine.run_single(0, &trace);
    REQUIRE(trace.size() == 6);
    for (std::size_t it = 1; it < trace.size(); ++it)
        for (std::int32_t src = 0; src < fx.query.k; ++src)
            CHECK(trace[it][src] <= trace[it - 1][src]);
}

TEST_CASE("every randomized result is bounded below by the exhaustive optimum") {
    const MatchFixture fx(11);
    SearchConfig cfg = base_config();
    cfg.runs = 2;
    const MatchEngine engine(fx.query, fx.query_feats, fx.library(), cfg);
    std::vector<double> optimum(fx.query.k, 1e300);
    for (const MatchRecord& r : engine.exhaustive(1)) optimum[r.src] = r.distance;
    for (const MatchRecord& r : engine.dspm())
        CHECK(r.distance >= optimum[r.src] - 1e-12);
}

TEST_CASE("multi-scale searches list every radius when per_scale is set") {
    const MatchFixture fx(12);
    SearchConfig cfg = base_config(12.0);
    cfg.scales.library_radii = {12.0, 24.0};
    cfg.runs = 2;
    cfg.per_scale = true;
    const MatchEngine engine(fx.query, fx.query_feats, fx.library(), cfg);
    const auto got = engine.dspm();
    REQUIRE(got.size() == static_cast<std::size_t>(fx.query.k) * 2 * 2);
    std::set<std::tuple<std::int32_t, std::int32_t, double>> seen;
    for (const MatchRecord& r : got) {
        CHECK((r.scale == 12.0 || r.scale == 24.0));
        CHECK(seen.insert({r.src, r.run, r.scale}).second);
    }
    // Exhaustive emits per-scale ranks too.
    const auto ex = engine.exhaustive(2);
    CHECK(ex.size() == static_cast<std::size_t>(fx.query.k) * 2 * 2);
}

TEST_CASE("joint-scale searches choose one radius per record") {
    const MatchFixture fx(13);
    SearchConfig cfg = base_config(12.0);
    cfg.scales.library_radii = {12.0, 24.0};
    cfg.runs = 3;
    cfg.per_scale = false;
    const MatchEngine engine(fx.query, fx.query_feats, fx.library(), cfg);
    const auto got = engine.dspm();
    REQUIRE(got.size() == static_cast<std::size_t>(fx.query.k) * 3);
    for (const MatchRecord& r : got)
        CHECK((r.scale == 12.0 || r.scale == 24.0));
}

TEST_CASE("knn_collect keeps only the first k runs") {
    std::vector<MatchRecord> records;
    for (int run = 0; run < 5; ++run)
        records.push_back({0, run, 0, run, 50.0, 0.1 * run});
    const auto kept = knn_collect(records, 2);
    REQUIRE(kept.size() == 2);
    for (const MatchRecord& r : kept) CHECK(r.run < 2);
    CHECK_THROWS_AS(knn_collect(records, 0), Error);
}

TEST_CASE("match csv round trip") {
    const std::string path =
        (std::filesystem::temp_directory_path() /
         ("dspm_matches_" + std::to_string(::getpid()) + ".csv")).string();
    std::vector<MatchRecord> records = {
        {3, 0, 1, 7, 50.0, 0.1234567},
        {0, 1, 0, 2, 33.333333, 1.5},
        {0, 0, 1, 9, 50.0, 0.75},
    };
    write_matches_csv(path, records);
    const auto back = read_matches_csv(path);
    std::filesystem::remove(path);
    REQUIRE(back.size() == 3);
    // Sorted by (src, run, scale, image, sp).
    CHECK(back[0].src == 0);
    CHECK(back[0].run == 0);
    CHECK(back[1].src == 0);
    CHECK(back[1].run == 1);
    CHECK(back[2].src == 3);
    // Distances survive at 6-decimal precision.
    CHECK(back[0].distance == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(back[2].distance == doctest::Approx(0.1234567).epsilon(1e-5));
    CHECK(back[1].scale == doctest::Approx(33.333333).epsilon(1e-5));
}

TEST_CASE("match csv errors") {
    CHECK_THROWS_AS(read_matches_csv("/nonexistent/matches.csv"), Error);
    const std::string path =
        (std::filesystem::temp_directory_path() /
         ("dspm_badcsv_" + std::to_string(::getpid()) + ".csv")).string();
    {
        std::FILE* f = std::fopen(path.c_str(), "wb");
        std::fputs("wrong,header\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(read_matches_csv(path), Error);
    std::filesystem::remove(path);
}

}  // TEST_SUITE
