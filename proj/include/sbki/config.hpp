#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sbki/kernel.hpp"

namespace sbki {

enum class MapMode : std::uint8_t { csm = 0, bki = 1 };

// Which neighbouring blocks supply training data to a block in bki mode.
enum class TrainingRegion : std::uint8_t {
    // Every block whose volume lies within the kernel support of a point (at most the
    // 26-neighbourhood when l <= block_size). Block-local updates equal global all-pairs BKI.
    kernel_support,
    // Centre block plus its 6 face-adjacent neighbours.
    extended_block,
};

const char* to_string(MapMode mode);
MapMode parse_mode(const std::string& text);

// Denser free samples outweigh the endpoint evidence on surfaces seen at oblique angles.
inline constexpr double kBkiFreeSpacing = 0.5;

struct MapConfig {
    double resolution = 0.1;
    unsigned block_depth = 3;
    std::size_t num_classes = 4;
    double prior = 0.001;
    KernelConfig kernel;
    MapMode mode = MapMode::bki;
    TrainingRegion training_region = TrainingRegion::kernel_support;

    double free_thresh = 0.47;
    double occ_thresh = 0.6;
    // Minimum accumulated evidence, in units of the largest weight one measurement can add
    // (1 in csm mode, signal_scale in bki mode).
    double evidence_threshold = 0.1;
    std::optional<double> variance_threshold;

    // Free-space sample spacing along beams. Zero picks the mode default: the resolution for
    // csm, kBkiFreeSpacing for bki.
    double spacing = 0.0;
    double min_range = 0.5;
    double max_range = 30.0;
    // Hit downsampling voxel size; zero disables.
    double ds_resolution = 0.0;

    unsigned thread_count = 1;

    // Block depth 3 for bki, 1 for csm.
    static MapConfig defaults_for(MapMode mode);

    double block_size() const { return resolution * static_cast<double>(1u << block_depth); }
    double free_spacing() const;
    // Absolute threshold on sum(alpha) - sum(alpha_0).
    double evidence_floor() const;

    // Throws InvalidArgument describing the first violated constraint.
    void validate() const;
};

}  // namespace sbki
