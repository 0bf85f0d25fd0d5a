#include "doctest.h"

#include "sbki/world.hpp"

using namespace sbki;

namespace {

bool same_world(const World& a, const World& b) {
    if (a.primitives.size() != b.primitives.size()) return false;
    for (std::size_t i = 0; i < a.primitives.size(); ++i) {
        const auto& p = a.primitives[i];
        const auto& q = b.primitives[i];
        if (p.index() != q.index()) return false;
        if (const auto* c = std::get_if<CylinderPrimitive>(&p)) {
            const auto& d = std::get<CylinderPrimitive>(q);
            if (c->cx != d.cx || c->cy != d.cy || c->radius != d.radius || c->z_max != d.z_max) return false;
        } else {
            const auto& x = std::get<BoxPrimitive>(p);
            const auto& y = std::get<BoxPrimitive>(q);
            if (x.box.min != y.box.min || x.box.max != y.box.max || x.label != y.label) return false;
        }
    }
    return true;
}

std::vector<CylinderPrimitive> cylinders(const World& w) {
    std::vector<CylinderPrimitive> out;
    for (const auto& p : w.primitives) {
        if (const auto* c = std::get_if<CylinderPrimitive>(&p)) out.push_back(*c);
    }
    return out;
}

}  // namespace

TEST_CASE("toy world is deterministic with the documented extents and classes") {
    const World a = make_toy_world(0), b = make_toy_world(0);
    CHECK(same_world(a, b));
    CHECK(a.extents.min == Vec3(0, 0, 0));
    CHECK(a.extents.max == Vec3(10.0, 7.0, 2.0));
    CHECK(a.num_classes == 4);
    CHECK_FALSE(same_world(make_toy_world(0), make_toy_world(1)));
}

TEST_CASE("toy world places 2-4 disjoint cylinders inside the room") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const World w = make_toy_world(seed);
        const auto cyl = cylinders(w);
        CHECK(cyl.size() >= 2);
        CHECK(cyl.size() <= 4);
        for (std::size_t i = 0; i < cyl.size(); ++i) {
            CHECK(cyl[i].cx - cyl[i].radius > w.extents.min.x());
            CHECK(cyl[i].cx + cyl[i].radius < w.extents.max.x());
            CHECK(cyl[i].cy - cyl[i].radius > w.extents.min.y());
            CHECK(cyl[i].cy + cyl[i].radius < w.extents.max.y());
            CHECK(cyl[i].z_max <= w.extents.max.z());
            CHECK(cyl[i].label == toy::kCylinder);
            for (std::size_t j = i + 1; j < cyl.size(); ++j) {
                CHECK(std::hypot(cyl[i].cx - cyl[j].cx, cyl[i].cy - cyl[j].cy) > cyl[i].radius + cyl[j].radius);
            }
        }
        // The survey path stays in free space.
        for (std::size_t i = 0; i < 40; ++i) {
            CHECK(w.label_at(survey_pose(w, i, 40).translation) == toy::kFree);
        }
    }
}

TEST_CASE("ray casting hits the nearest primitive") {
    World w;
    w.extents = Aabb{Vec3(-5, -5, -5), Vec3(5, 5, 5)};
    w.primitives.emplace_back(BoxPrimitive{Aabb{Vec3(2, -1, -1), Vec3(2.1, 1, 1)}, toy::kWall});
    w.primitives.emplace_back(CylinderPrimitive{0.0, 3.0, 0.5, -1.0, 1.0, toy::kCylinder});

    auto hit = cast_ray(w, Vec3::Zero(), Vec3::UnitX(), 30.0);
    REQUIRE(hit);
    CHECK(hit->range == 2.0);
    CHECK(hit->label == toy::kWall);

    hit = cast_ray(w, Vec3::Zero(), Vec3::UnitY(), 30.0);
    REQUIRE(hit);
    CHECK(hit->range == doctest::Approx(2.5));
    CHECK(hit->label == toy::kCylinder);

    // Down onto the cylinder cap.
    hit = cast_ray(w, Vec3(0, 3, 4), -Vec3::UnitZ(), 30.0);
    REQUIRE(hit);
    CHECK(hit->range == doctest::Approx(3.0));

    CHECK_FALSE(cast_ray(w, Vec3::Zero(), -Vec3::UnitX(), 30.0));
    CHECK_FALSE(cast_ray(w, Vec3::Zero(), Vec3::UnitX(), 1.5));
}

TEST_CASE("simulated scans") {
    World w;
    w.extents = Aabb{Vec3(-5, -5, -5), Vec3(5, 5, 5)};
    w.primitives.emplace_back(BoxPrimitive{Aabb{Vec3(2, -4, -4), Vec3(2.1, 4, 4)}, toy::kWall});
    RayPattern rays;
    rays.azimuth_count = 4;
    rays.elevation_count = 1;
    rays.elevation_min = rays.elevation_max = 0.0;
    SimulationOptions opts;
    opts.max_range = 30.0;
    const Scan scan = simulate_scan(w, Pose{}, rays, opts);
    REQUIRE(scan.hits.size() == 4);
    CHECK(scan.hits[0].position.isApprox(Vec3(2, 0, 0)));
    CHECK(std::get<ClassId>(scan.hits[0].label) == toy::kWall);
    // Miss: free-labelled point at max range.
    CHECK((scan.hits[2].position - Vec3(-30, 0, 0)).norm() < 1e-9);
    CHECK(std::get<ClassId>(scan.hits[2].label) == toy::kFree);

    opts.noise_sigma = 0.05;
    opts.seed = 3;
    const Scan n1 = simulate_scan(w, Pose{}, rays, opts);
    const Scan n2 = simulate_scan(w, Pose{}, rays, opts);
    CHECK(n1.hits[0].position == n2.hits[0].position);
    CHECK(std::get<ClassId>(n1.hits[0].label) == toy::kWall);
    CHECK(n1.hits[0].position.y() == doctest::Approx(0.0));
}

TEST_CASE("ground truth labels cell centroids") {
    const World w = make_toy_world(0);
    const auto gt = ground_truth_grid(w, 0.1);
    CHECK(gt.dims() == VoxelIndex{100, 70, 20});
    CHECK(gt.count(toy::kGround) == 100 * 70);
    // Four walls one voxel thick above the ground layer, corners counted once.
    CHECK(gt.count(toy::kWall) == (2 * 100 + 2 * 68) * 19);
    CHECK(gt.count(toy::kCylinder) > 0);

    const auto idx = [&](double x, double y, double z) {
        return *gt.index_of(voxel_of(Vec3(x, y, z), 0.1));
    };
    CHECK(gt.label(idx(5.0, 3.5, 0.05)) == toy::kGround);
    CHECK(gt.label(idx(0.05, 3.5, 1.0)) == toy::kWall);
    CHECK(gt.label(idx(5.0, 0.3, 1.95)) == toy::kFree);
    for (const auto& c : cylinders(w)) {
        CHECK(gt.label(idx(c.cx, c.cy, 0.5)) == toy::kCylinder);
    }
    CHECK_FALSE(gt.index_of(VoxelIndex{-1, 0, 0}));
}
