#pragma once

#include <span>
#include <variant>
#include <vector>

#include <Eigen/Geometry>

#include "sbki/types.hpp"

namespace sbki {

struct MapConfig;

// Rigid sensor pose: p_map = rotation * p_sensor + translation.
struct Pose {
    Vec3 translation = Vec3::Zero();
    Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();

    static Pose identity() { return Pose{}; }
    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    // Throws unless the quaternion has unit norm within `tolerance`.
    void validate(double tolerance = 1e-9) const;
};

using SoftLabel = std::vector<double>;
using HitLabel = std::variant<ClassId, SoftLabel>;

struct Hit {
    Vec3 position = Vec3::Zero();  // sensor frame
    HitLabel label = ClassId{0};
};

struct Scan {
    Pose origin;
    std::vector<Hit> hits;
};

// Hard ids map to their unit vector; soft vectors map to their argmax (lowest index on ties).
OneHot to_one_hot(const HitLabel& label, std::size_t num_classes);

// Free-labelled points at spacing, 2*spacing, ... along the beam, strictly before the endpoint.
void sample_free_points(const Vec3& origin, const Vec3& endpoint, double spacing,
                        std::size_t num_classes, std::vector<LabeledPoint>& out);
std::vector<LabeledPoint> sample_free_points(const Vec3& origin, const Vec3& endpoint,
                                             double spacing, std::size_t num_classes);

// Voxel-grid downsampling of beam endpoints: one survivor per voxel (the point nearest the
// voxel centre) carrying the majority label. Output follows first appearance in the input.
std::vector<LabeledPoint> downsample(std::span<const LabeledPoint> points, double voxel_size);

// Map-frame training data for one scan: endpoints within [min_range, max_range] plus
// interpolated free points along every kept beam. Longer beams are cut at max_range and only
// contribute free points.
std::vector<LabeledPoint> expand_scan(const Scan& scan, const MapConfig& config);

}  // namespace sbki
