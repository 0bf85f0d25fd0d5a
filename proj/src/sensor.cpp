#include "sbki/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "sbki/config.hpp"
#include "sbki/spatial.hpp"

namespace sbki {

void Pose::validate(double tolerance) const {
    if (!translation.allFinite()) throw InvalidArgument("pose translation is not finite");
    if (std::abs(rotation.norm() - 1.0) > tolerance) {
        throw InvalidArgument("pose quaternion is not unit length");
    }
}

OneHot to_one_hot(const HitLabel& label, std::size_t num_classes) {
    if (const auto* id = std::get_if<ClassId>(&label)) return OneHot(*id, num_classes);

    const auto& soft = std::get<SoftLabel>(label);
    if (soft.size() != num_classes) {
        throw InvalidArgument("soft label has " + std::to_string(soft.size()) +
                              " entries, expected " + std::to_string(num_classes));
    }
    double sum = 0.0;
    for (double p : soft) {
        if (!std::isfinite(p) || p < 0.0) throw InvalidArgument("soft label entry is invalid");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw InvalidArgument("soft label does not sum to 1");
    ClassId best = 0;
    for (std::size_t k = 1; k < soft.size(); ++k) {
        if (soft[k] > soft[best]) best = static_cast<ClassId>(k);
    }
    return OneHot(best, num_classes);
}

void sample_free_points(const Vec3& origin, const Vec3& endpoint, double spacing,
                        std::size_t num_classes, std::vector<LabeledPoint>& out) {
    if (!(spacing > 0.0)) throw InvalidArgument("free-space spacing must be positive");
    constexpr double kEndpointGap = 1e-9;
    const Vec3 beam = endpoint - origin;
    const double length = beam.norm();
    if (!(length > 0.0)) return;
    const OneHot free_label(kFreeClass, num_classes);
    for (std::size_t j = 1;; ++j) {
        const double s = static_cast<double>(j) * spacing;
        if (!(s < length - kEndpointGap)) break;
        out.push_back(LabeledPoint{origin + (s / length) * beam, free_label});
    }
}

std::vector<LabeledPoint> sample_free_points(const Vec3& origin, const Vec3& endpoint,
                                             double spacing, std::size_t num_classes) {
    std::vector<LabeledPoint> out;
    sample_free_points(origin, endpoint, spacing, num_classes, out);
    return out;
}

namespace {

struct VoxelHash {
    std::size_t operator()(const VoxelIndex& v) const noexcept {
        return BlockKeyHash{}(BlockKey{v.x, v.y, v.z});
    }
};

}  // namespace

std::vector<LabeledPoint> downsample(std::span<const LabeledPoint> points, double voxel_size) {
    if (!(voxel_size > 0.0)) throw InvalidArgument("downsampling voxel size must be positive");
    struct Bucket {
        std::size_t first = 0;
        std::size_t nearest = 0;
        double nearest_d2 = 0.0;
        std::vector<std::size_t> votes;
    };
    std::unordered_map<VoxelIndex, Bucket, VoxelHash> buckets;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const VoxelIndex v = voxel_of(points[i].position, voxel_size);
        const double d2 = (points[i].position - voxel_centroid(v, voxel_size)).squaredNorm();
        auto [it, inserted] = buckets.try_emplace(v);
        Bucket& b = it->second;
        if (inserted) {
            b.first = i;
            b.nearest = i;
            b.nearest_d2 = d2;
            b.votes.assign(points[i].label.size(), 0);
        } else if (d2 < b.nearest_d2) {
            b.nearest = i;
            b.nearest_d2 = d2;
        }
        b.votes[points[i].label.index()] += 1;
    }

    std::vector<const Bucket*> order;
    order.reserve(buckets.size());
    for (const auto& [voxel, bucket] : buckets) order.push_back(&bucket);
    std::sort(order.begin(), order.end(),
              [](const Bucket* a, const Bucket* b) { return a->first < b->first; });

    std::vector<LabeledPoint> out;
    out.reserve(order.size());
    for (const Bucket* b : order) {
        const auto best = std::max_element(b->votes.begin(), b->votes.end());  // first max wins
        const auto cls = static_cast<ClassId>(best - b->votes.begin());
        out.push_back(LabeledPoint{points[b->nearest].position, OneHot(cls, b->votes.size())});
    }
    return out;
}

std::vector<LabeledPoint> expand_scan(const Scan& scan, const MapConfig& config) {
    const std::size_t k = config.num_classes;
    std::vector<LabeledPoint> endpoints;
    endpoints.reserve(scan.hits.size());
    // Convert every label first so a bad label rejects the scan before any output exists.
    for (const auto& hit : scan.hits) {
        if (!hit.position.allFinite()) throw InvalidArgument("scan contains a non-finite point");
        endpoints.push_back(LabeledPoint{scan.origin.apply(hit.position), to_one_hot(hit.label, k)});
    }
    if (config.ds_resolution > 0.0) endpoints = downsample(endpoints, config.ds_resolution);

    const Vec3 origin = scan.origin.translation;
    const double spacing = config.free_spacing();
    std::vector<LabeledPoint> out;
    out.reserve(endpoints.size() * 8);
    for (const auto& e : endpoints) {
        const Vec3 beam = e.position - origin;
        const double range = beam.norm();
        if (range < config.min_range) continue;
        if (range > config.max_range) {
            sample_free_points(origin, origin + beam * (config.max_range / range), spacing, k, out);
            continue;
        }
        sample_free_points(origin, e.position, spacing, k, out);
        out.push_back(e);
    }
    return out;
}

}  // namespace sbki
