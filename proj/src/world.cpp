#include "sbki/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace sbki {

namespace {

constexpr double kShell = 0.099;
constexpr double kLoopHeight = 1.0;

bool inside(const Primitive& prim, const Vec3& p) {
    if (const auto* b = std::get_if<BoxPrimitive>(&prim)) return b->box.contains(p);
    const auto& c = std::get<CylinderPrimitive>(prim);
    const double dx = p.x() - c.cx, dy = p.y() - c.cy;
    return p.z() >= c.z_min && p.z() <= c.z_max && dx * dx + dy * dy <= c.radius * c.radius;
}

ClassId label_of(const Primitive& prim) {
    return std::visit([](const auto& s) { return s.label; }, prim);
}

Vec3 loop_center(const World& w) { return 0.5 * (w.extents.min + w.extents.max); }

Eigen::Vector2d loop_radii(const World& w) {
    const Vec3 size = w.extents.max - w.extents.min;
    return {0.3 * size.x(), 0.26 * size.y()};
}

double distance_to_loop(const World& w, double x, double y) {
    const Vec3 c = loop_center(w);
    const Eigen::Vector2d r = loop_radii(w);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 720; ++i) {
        const double t = 2.0 * std::numbers::pi * i / 720.0;
        best = std::min(best, std::hypot(c.x() + r.x() * std::cos(t) - x, c.y() + r.y() * std::sin(t) - y));
    }
    return best;
}

// Slab test; returns entry distance along the ray if it enters the box within [0, max].
std::optional<double> intersect_box(const Aabb& box, const Vec3& o, const Vec3& d, double max_t) {
    double t0 = 0.0, t1 = max_t;
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-15) {
            if (o[a] < box.min[a] || o[a] > box.max[a]) return std::nullopt;
            continue;
        }
        double ta = (box.min[a] - o[a]) / d[a];
        double tb = (box.max[a] - o[a]) / d[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return std::nullopt;
    }
    return t0;
}

std::optional<double> intersect_cylinder(const CylinderPrimitive& c, const Vec3& o, const Vec3& d,
                                         double max_t) {
    std::optional<double> best;
    auto consider = [&](double t) {
        if (t >= 0.0 && t <= max_t && (!best || t < *best)) best = t;
    };
    // Lateral surface.
    const double ox = o.x() - c.cx, oy = o.y() - c.cy;
    const double a = d.x() * d.x() + d.y() * d.y();
    if (a > 1e-15) {
        const double b = 2.0 * (ox * d.x() + oy * d.y());
        const double cc = ox * ox + oy * oy - c.radius * c.radius;
        const double disc = b * b - 4.0 * a * cc;
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            for (double t : {(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)}) {
                const double z = o.z() + t * d.z();
                if (z >= c.z_min && z <= c.z_max) consider(t);
            }
        }
    }
    // Caps.
    if (std::abs(d.z()) > 1e-15) {
        for (double zc : {c.z_min, c.z_max}) {
            const double t = (zc - o.z()) / d.z();
            const double x = ox + t * d.x(), y = oy + t * d.y();
            if (x * x + y * y <= c.radius * c.radius) consider(t);
        }
    }
    return best;
}

}  // namespace

ClassId World::label_at(const Vec3& p) const {
    for (const auto& prim : primitives) {
        if (inside(prim, p)) return label_of(prim);
    }
    return toy::kFree;
}

World make_toy_world(std::uint64_t seed) {
    World w;
    w.extents = Aabb{Vec3(0.0, 0.0, 0.0), Vec3(10.0, 7.0, 2.0)};
    w.num_classes = toy::kNumClasses;
    const Vec3 lo = w.extents.min, hi = w.extents.max;

    w.primitives.emplace_back(
        BoxPrimitive{Aabb{lo, Vec3(hi.x(), hi.y(), lo.z() + kShell)}, toy::kGround});
    w.primitives.emplace_back(
        BoxPrimitive{Aabb{lo, Vec3(lo.x() + kShell, hi.y(), hi.z())}, toy::kWall});
    w.primitives.emplace_back(
        BoxPrimitive{Aabb{Vec3(hi.x() - kShell, lo.y(), lo.z()), hi}, toy::kWall});
    w.primitives.emplace_back(
        BoxPrimitive{Aabb{lo, Vec3(hi.x(), lo.y() + kShell, hi.z())}, toy::kWall});
    w.primitives.emplace_back(
        BoxPrimitive{Aabb{Vec3(lo.x(), hi.y() - kShell, lo.z()), hi}, toy::kWall});

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int count = 2 + static_cast<int>(rng() % 3);
    std::vector<CylinderPrimitive> placed;
    // Obstacles stand inside the survey loop so that the sensor circles them.
    const Vec3 center = loop_center(w);
    const Eigen::Vector2d radii = loop_radii(w);
    for (int attempt = 0; attempt < 100000 && static_cast<int>(placed.size()) < count; ++attempt) {
        CylinderPrimitive c;
        c.radius = 0.15 + 0.1 * unit(rng);
        c.cx = center.x() + radii.x() * (2.0 * unit(rng) - 1.0);
        c.cy = center.y() + radii.y() * (2.0 * unit(rng) - 1.0);
        c.z_min = lo.z();
        c.z_max = lo.z() + 0.8 + 1.0 * unit(rng);
        c.label = toy::kCylinder;
        const double ex = (c.cx - center.x()) / radii.x(), ey = (c.cy - center.y()) / radii.y();
        bool ok = ex * ex + ey * ey < 1.0 && distance_to_loop(w, c.cx, c.cy) > c.radius + 0.6;
        for (const auto& o : placed) {
            ok = ok && std::hypot(o.cx - c.cx, o.cy - c.cy) > o.radius + c.radius + 0.3;
        }
        if (ok) placed.push_back(c);
    }
    for (const auto& c : placed) w.primitives.emplace_back(c);
    return w;
}

Pose survey_pose(const World& world, std::size_t i, std::size_t n) {
    const Vec3 c = loop_center(world);
    const Eigen::Vector2d r = loop_radii(world);
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(n, 1));
    Pose pose;
    pose.translation = Vec3(c.x() + r.x() * std::cos(t), c.y() + r.y() * std::sin(t),
                            world.extents.min.z() + kLoopHeight);
    const double yaw = std::atan2(r.y() * std::cos(t), -r.x() * std::sin(t));
    pose.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
    return pose;
}

std::optional<RayHit> cast_ray(const World& world, const Vec3& origin, const Vec3& direction,
                               double max_range) {
    std::optional<RayHit> best;
    for (const auto& prim : world.primitives) {
        std::optional<double> t;
        if (const auto* b = std::get_if<BoxPrimitive>(&prim)) {
            t = intersect_box(b->box, origin, direction, max_range);
        } else {
            t = intersect_cylinder(std::get<CylinderPrimitive>(prim), origin, direction, max_range);
        }
        if (t && (!best || *t < best->range)) best = RayHit{*t, label_of(prim)};
    }
    return best;
}

std::vector<Vec3> RayPattern::directions() const {
    std::vector<Vec3> dirs;
    dirs.reserve(static_cast<std::size_t>(azimuth_count) * static_cast<std::size_t>(elevation_count));
    for (int j = 0; j < elevation_count; ++j) {
        const double e = elevation_count == 1
                             ? 0.5 * (elevation_min + elevation_max)
                             : elevation_min + (elevation_max - elevation_min) * j / (elevation_count - 1);
        for (int i = 0; i < azimuth_count; ++i) {
            const double a = 2.0 * std::numbers::pi * i / azimuth_count;
            dirs.emplace_back(std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), std::sin(e));
        }
    }
    return dirs;
}

Scan simulate_scan(const World& world, const Pose& sensor_pose, const RayPattern& rays,
                   const SimulationOptions& options) {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    Scan scan;
    scan.origin = sensor_pose;
    for (const Vec3& d : rays.directions()) {
        const Vec3 world_dir = sensor_pose.rotation * d;
        const auto hit = cast_ray(world, sensor_pose.translation, world_dir, options.max_range);
        if (!hit) {
            scan.hits.push_back(Hit{d * options.max_range, ClassId{toy::kFree}});
            continue;
        }
        double range = hit->range;
        if (options.noise_sigma > 0.0) range = std::max(0.0, range + options.noise_sigma * noise(rng));
        scan.hits.push_back(Hit{d * range, hit->label});
    }
    return scan;
}

GroundTruthGrid::GroundTruthGrid(double resolution, VoxelIndex min_voxel, VoxelIndex dims)
    : resolution_(resolution),
      min_voxel_(min_voxel),
      dims_(dims),
      labels_(static_cast<std::size_t>(dims.x * dims.y * dims.z), toy::kFree) {
    if (!(resolution > 0.0)) throw InvalidArgument("ground-truth resolution must be positive");
}

VoxelIndex GroundTruthGrid::voxel(std::size_t i) const {
    const auto idx = static_cast<std::int64_t>(i);
    return VoxelIndex{min_voxel_.x + idx % dims_.x, min_voxel_.y + (idx / dims_.x) % dims_.y,
                      min_voxel_.z + idx / (dims_.x * dims_.y)};
}

std::optional<std::size_t> GroundTruthGrid::index_of(const VoxelIndex& v) const {
    const std::int64_t x = v.x - min_voxel_.x, y = v.y - min_voxel_.y, z = v.z - min_voxel_.z;
    if (x < 0 || y < 0 || z < 0 || x >= dims_.x || y >= dims_.y || z >= dims_.z) return std::nullopt;
    return static_cast<std::size_t>(x + dims_.x * (y + dims_.y * z));
}

std::size_t GroundTruthGrid::count(ClassId c) const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), c));
}

namespace {

std::int64_t upper_voxel(double coord, double resolution) {
    const double q = coord / resolution;
    const double r = std::round(q);
    return static_cast<std::int64_t>(std::abs(q - r) < 1e-9 ? r : std::ceil(q));
}

}  // namespace

GroundTruthGrid ground_truth_grid(const World& world, double resolution) {
    if (!(resolution > 0.0)) throw InvalidArgument("ground-truth resolution must be positive");
    const VoxelIndex lo = voxel_of(world.extents.min, resolution);
    const VoxelIndex hi{upper_voxel(world.extents.max.x(), resolution),
                        upper_voxel(world.extents.max.y(), resolution),
                        upper_voxel(world.extents.max.z(), resolution)};
    GroundTruthGrid grid(resolution, lo, VoxelIndex{hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
    for (std::size_t i = 0; i < grid.size(); ++i) grid.set_label(i, world.label_at(grid.centroid(i)));
    return grid;
}

}  // namespace sbki
