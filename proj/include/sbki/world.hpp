#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "sbki/sensor.hpp"
#include "sbki/spatial.hpp"

namespace sbki {

// Classes of the synthetic room.
namespace toy {
inline constexpr ClassId kFree = 0;
inline constexpr ClassId kGround = 1;
inline constexpr ClassId kWall = 2;
inline constexpr ClassId kCylinder = 3;
inline constexpr std::size_t kNumClasses = 4;
}  // namespace toy

struct Aabb {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();

    bool contains(const Vec3& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
};

struct BoxPrimitive {
    Aabb box;
    ClassId label = 0;
};

// Solid upright cylinder with a flat top.
struct CylinderPrimitive {
    double cx = 0.0, cy = 0.0, radius = 0.0;
    double z_min = 0.0, z_max = 0.0;
    ClassId label = 0;
};

using Primitive = std::variant<BoxPrimitive, CylinderPrimitive>;

struct World {
    Aabb extents;
    std::vector<Primitive> primitives;  // earlier primitives win where they overlap
    std::size_t num_classes = toy::kNumClasses;

    // Label of the first primitive containing p, or free.
    ClassId label_at(const Vec3& p) const;
};

// 10 x 7 x 2 m room: ground slab, four walls, and 2-4 non-overlapping cylinders inside the
// survey loop. Ground and walls are 0.099 m shells, so at 0.1 m resolution each visible face
// lies just inside one voxel layer and free samples in front of it fall in the next layer.
World make_toy_world(std::uint64_t seed);

// Sensor pose i of n on the elliptical survey loop through the toy room.
Pose survey_pose(const World& world, std::size_t i, std::size_t n);

struct RayHit {
    double range = 0.0;
    ClassId label = 0;
};

// Nearest intersection along a unit direction within max_range.
std::optional<RayHit> cast_ray(const World& world, const Vec3& origin, const Vec3& direction,
                               double max_range);

// Spherical grid of sensor-frame ray directions.
struct RayPattern {
    int azimuth_count = 180;
    int elevation_count = 16;
    double elevation_min = -0.9;  // rad
    double elevation_max = 0.3;   // rad

    std::vector<Vec3> directions() const;
};

struct SimulationOptions {
    double max_range = 30.0;
    double noise_sigma = 0.0;        // along-ray Gaussian range noise [m]
    std::uint64_t seed = 0;
};

// Misses are reported as class-0 points at max_range, i.e. free-only beams.
Scan simulate_scan(const World& world, const Pose& sensor_pose, const RayPattern& rays,
                   const SimulationOptions& options);

// Dense per-voxel labels over the world extents.
class GroundTruthGrid {
public:
    GroundTruthGrid(double resolution, VoxelIndex min_voxel, VoxelIndex dims);

    double resolution() const { return resolution_; }
    const VoxelIndex& min_voxel() const { return min_voxel_; }
    const VoxelIndex& dims() const { return dims_; }
    std::size_t size() const { return labels_.size(); }

    VoxelIndex voxel(std::size_t i) const;
    Vec3 centroid(std::size_t i) const { return voxel_centroid(voxel(i), resolution_); }
    ClassId label(std::size_t i) const { return labels_[i]; }
    void set_label(std::size_t i, ClassId c) { labels_[i] = c; }
    std::optional<std::size_t> index_of(const VoxelIndex& v) const;

    std::size_t count(ClassId c) const;

private:
    double resolution_;
    VoxelIndex min_voxel_;
    VoxelIndex dims_;
    std::vector<ClassId> labels_;
};

GroundTruthGrid ground_truth_grid(const World& world, double resolution);

}  // namespace sbki
