#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "sbki/kernel.hpp"
#include "sbki/semantic_map.hpp"

using namespace sbki;

namespace {

std::vector<LabeledPoint> random_points(std::mt19937_64& rng, std::size_t n, std::size_t k,
                                        double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<LabeledPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
        pts.push_back({Vec3(u(rng), u(rng), u(rng)), OneHot(static_cast<ClassId>(rng() % k), k)});
    }
    return pts;
}

std::vector<double> snapshot(const SemanticMap& map) {
    std::vector<double> out;
    for (const auto& key : map.sorted_keys()) {
        const auto data = map.find_block(key)->data();
        out.insert(out.end(), data.begin(), data.end());
    }
    return out;
}

MapConfig small_config(MapMode mode) {
    MapConfig cfg = MapConfig::defaults_for(mode);
    cfg.num_classes = 3;
    cfg.min_range = 0.0;
    return cfg;
}

}  // namespace

TEST_CASE("empty scan leaves the map empty") {
    SemanticMap map(small_config(MapMode::bki));
    map.insert_scan(Scan{});
    CHECK(map.block_count() == 0);
    CHECK(map.export_cells(CellFilter::all).empty());
    CHECK_FALSE(map.query_point(Vec3(0, 0, 0)));
}

TEST_CASE("a single point at a centroid adds the kernel peak") {
    auto cfg = small_config(MapMode::bki);
    SemanticMap map(cfg);
    const Vec3 c(0.05, 0.05, 0.05);
    const std::vector<LabeledPoint> pts{{c, OneHot(2, 3)}};
    map.insert_training(pts);
    const auto key = block_key_of(c, cfg);
    const auto* grid = map.find_block(key);
    REQUIRE(grid);
    const auto a = grid->alpha(grid->cell_index_of(c));
    CHECK(a[0] == doctest::Approx(cfg.prior));
    CHECK(a[1] == doctest::Approx(cfg.prior));
    CHECK(a[2] == doctest::Approx(cfg.prior + cfg.kernel.signal_scale).epsilon(1e-12));

    // Neighbour one voxel away gets k(0.1).
    const Vec3 n = c + Vec3(0.1, 0, 0);
    const auto* g2 = map.find_block(block_key_of(n, cfg));
    REQUIRE(g2);
    CHECK(g2->alpha(g2->cell_index_of(n))[2] ==
          doctest::Approx(cfg.prior + sparse_kernel(0.1, cfg.kernel)).epsilon(1e-12));
}

TEST_CASE("inserting the same scan twice doubles the evidence") {
    auto cfg = small_config(MapMode::bki);
    Scan scan;
    scan.hits.push_back(Hit{Vec3(1.03, 0.2, -0.4), ClassId{1}});
    scan.hits.push_back(Hit{Vec3(-0.7, 0.9, 0.1), ClassId{2}});
    SemanticMap once(cfg), twice(cfg);
    once.insert_scan(scan);
    twice.insert_scan(scan);
    twice.insert_scan(scan);
    CHECK(twice.scan_count() == 2);
    const auto a = snapshot(once), b = snapshot(twice);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(b[i] - cfg.prior == doctest::Approx(2.0 * (a[i] - cfg.prior)).epsilon(1e-12));
    }
}

TEST_CASE("block-local BKI equals all-pairs BKI including diagonal neighbours") {
    auto cfg = small_config(MapMode::bki);
    std::mt19937_64 rng(5);
    std::vector<std::vector<LabeledPoint>> batches;
    for (int b = 0; b < 3; ++b) batches.push_back(random_points(rng, 300, 3, -1.0, 1.0));
    // Points near a block corner so that diagonal neighbours matter.
    batches.push_back({{Vec3(0.79, 0.79, 0.79), OneHot(1, 3)}, {Vec3(-0.01, -0.02, 0.81), OneHot(2, 3)}});

    SemanticMap map(cfg);
    for (const auto& b : batches) map.insert_training(b);

    std::size_t checked = 0, nonprior = 0;
    for (const auto& cell : map.export_cells(CellFilter::all)) {
        const auto* grid = map.find_block(cell.block);
        const auto got = grid->alpha(cell.index);
        const auto want = oracle::all_pairs_alpha(cell.centroid, 3, cfg.prior, batches,
                                                  cfg.kernel.length_scale, cfg.kernel.signal_scale);
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(std::abs(got[k] - want[k]) <= 1e-9 * std::max(1.0, std::abs(want[k])));
            if (want[k] > cfg.prior) ++nonprior;
        }
        ++checked;
    }
    CHECK(checked > 0);
    CHECK(nonprior > 0);

    // Every cell with oracle evidence must be allocated.
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int t = 0; t < 2000; ++t) {
        const Vec3 q = voxel_centroid(voxel_of(Vec3(u(rng), u(rng), u(rng)), cfg.resolution), cfg.resolution);
        const auto want = oracle::all_pairs_alpha(q, 3, cfg.prior, batches, cfg.kernel.length_scale,
                                                  cfg.kernel.signal_scale);
        const bool evidence = want[0] > cfg.prior || want[1] > cfg.prior || want[2] > cfg.prior;
        if (evidence) CHECK(map.query_point(q).has_value());
    }
}

TEST_CASE("seven-block training region misses diagonal support") {
    auto cfg = small_config(MapMode::bki);
    cfg.training_region = TrainingRegion::extended_block;
    SemanticMap map(cfg);
    // Point just across the corner of block (0,0,0) in block (-1,-1,0).
    const Vec3 p(-0.01, -0.01, 0.05);
    const std::vector<LabeledPoint> pts{{p, OneHot(1, 3)}};
    map.insert_training(pts);
    const Vec3 q(0.05, 0.05, 0.05);
    const double want = cfg.prior + sparse_kernel((q - p).norm(), cfg.kernel);
    const auto* grid = map.find_block(BlockKey{0, 0, 0});
    const double got = grid ? grid->alpha(grid->cell_index_of(q))[1] : cfg.prior;
    CHECK(want > cfg.prior);
    CHECK(got == doctest::Approx(cfg.prior));

    cfg.training_region = TrainingRegion::kernel_support;
    SemanticMap full(cfg);
    full.insert_training(pts);
    const auto* g2 = full.find_block(BlockKey{0, 0, 0});
    REQUIRE(g2);
    CHECK(g2->alpha(g2->cell_index_of(q))[1] == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("CSM cells equal direct counting") {
    auto cfg = small_config(MapMode::csm);
    std::mt19937_64 rng(11);
    std::vector<std::vector<LabeledPoint>> batches;
    for (int b = 0; b < 4; ++b) batches.push_back(random_points(rng, 400, 3, -0.6, 0.6));
    SemanticMap map(cfg);
    for (const auto& b : batches) map.insert_training(b);
    for (const auto& cell : map.export_cells(CellFilter::all)) {
        const auto got = map.find_block(cell.block)->alpha(cell.index);
        const auto want = oracle::all_pairs_counts(cell.centroid, cfg.resolution, 3, cfg.prior, batches);
        for (std::size_t k = 0; k < 3; ++k) CHECK(got[k] == want[k]);
    }
}

TEST_CASE("CSM matches csm_update bit for bit") {
    auto cfg = small_config(MapMode::csm);
    std::mt19937_64 rng(12);
    const auto pts = random_points(rng, 2000, 3, -0.3, 0.3);
    SemanticMap map(cfg);
    map.insert_training(pts);
    for (const auto& cell : map.export_cells(CellFilter::all)) {
        std::vector<LabeledPoint> inside;
        for (const auto& p : pts) {
            if (voxel_of(p.position, cfg.resolution) == voxel_of(cell.centroid, cfg.resolution)) inside.push_back(p);
        }
        const auto want = csm_update(DirichletParams(3, cfg.prior), inside);
        const auto got = map.find_block(cell.block)->alpha(cell.index);
        for (std::size_t k = 0; k < 3; ++k) CHECK(got[k] == want[k]);
    }
}

TEST_CASE("results do not depend on thread count") {
    for (auto mode : {MapMode::csm, MapMode::bki}) {
        std::mt19937_64 rng(21);
        std::vector<std::vector<LabeledPoint>> batches;
        for (int b = 0; b < 3; ++b) batches.push_back(random_points(rng, 1500, 3, -3.0, 3.0));
        std::vector<std::vector<double>> results;
        for (unsigned threads : {1u, 2u, 4u, 7u}) {
            auto cfg = small_config(mode);
            cfg.thread_count = threads;
            SemanticMap map(cfg);
            for (const auto& b : batches) map.insert_training(b);
            results.push_back(snapshot(map));
        }
        for (const auto& r : results) CHECK(r == results.front());
    }
}

TEST_CASE("out-of-range labels are rejected before any change") {
    auto cfg = small_config(MapMode::bki);
    SemanticMap map(cfg);
    const std::vector<LabeledPoint> ok{{Vec3(0.1, 0.1, 0.1), OneHot(1, 3)}};
    map.insert_training(ok);
    const auto before = snapshot(map);
    const auto blocks = map.block_count();

    Scan bad;
    bad.hits.push_back(Hit{Vec3(5, 5, 5), ClassId{1}});
    bad.hits.push_back(Hit{Vec3(0.2, 0.1, 0.1), ClassId{3}});
    CHECK_THROWS_AS(map.insert_scan(bad), InvalidArgument);
    CHECK(map.block_count() == blocks);
    CHECK(snapshot(map) == before);
    CHECK(map.scan_count() == 1);

    const std::vector<LabeledPoint> wrong_k{{Vec3(0.1, 0.1, 0.1), OneHot(1, 2)}};
    CHECK_THROWS_AS(map.insert_training(wrong_k), InvalidArgument);
    CHECK(snapshot(map) == before);
}

TEST_CASE("queries report occupied, free and unobserved cells") {
    auto cfg = small_config(MapMode::bki);
    cfg.spacing = 0.4;
    SemanticMap map(cfg);
    Scan scan;
    scan.hits.push_back(Hit{Vec3(3.05, 0.05, 0.05), ClassId{2}});
    for (int i = 0; i < 5; ++i) map.insert_scan(scan);

    const auto hit = map.query_point(Vec3(3.05, 0.05, 0.05));
    REQUIRE(hit);
    CHECK(hit->state == CellState::Occupied);
    CHECK(hit->argmax_class == 2);

    const auto free_cell = map.query_point(Vec3(1.55, 0.05, 0.05));
    REQUIRE(free_cell);
    CHECK(free_cell->state == CellState::Free);
    CHECK(free_cell->argmax_class == 0);

    CHECK_FALSE(map.query_point(Vec3(-20, 4, 4)));
}

TEST_CASE("export order and filters") {
    auto cfg = small_config(MapMode::bki);
    SemanticMap map(cfg);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 3; ++i) {
        Scan scan;
        scan.origin.translation = Vec3(0.3 * i, 0.0, 0.0);
        for (int j = 0; j < 60; ++j) {
            const double a = 0.1 * j;
            scan.hits.push_back(Hit{Vec3(2.0 * std::cos(a), 2.0 * std::sin(a), 0.3), ClassId{static_cast<ClassId>(1 + j % 2)}});
        }
        map.insert_scan(scan);
    }
    const auto all = map.export_cells(CellFilter::all);
    const auto occ = map.export_cells(CellFilter::occupied);
    const auto fre = map.export_cells(CellFilter::free);
    CHECK(all.size() == map.block_count() * geometry_of(cfg).cell_count());
    CHECK_FALSE(occ.empty());
    CHECK_FALSE(fre.empty());
    for (std::size_t i = 1; i < all.size(); ++i) {
        const bool ordered = all[i - 1].block < all[i].block ||
                             (all[i - 1].block == all[i].block && all[i - 1].index < all[i].index);
        CHECK(ordered);
    }
    for (const auto& c : occ) CHECK(c.stats.state == CellState::Occupied);
    for (const auto& c : fre) CHECK(c.stats.state == CellState::Free);
    CHECK(occ.size() + fre.size() <= all.size());
}
