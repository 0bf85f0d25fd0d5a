#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "sbki/io.hpp"
#include "sbki/semantic_map.hpp"
#include "sbki/world.hpp"

namespace sbki {

// On-disk layout: <dir>/poses.txt, <dir>/scans/scan_NNNNNN.txt, <dir>/gt.txt.
struct DatasetPaths {
    std::filesystem::path root;

    std::filesystem::path poses() const { return root / "poses.txt"; }
    std::filesystem::path scans_dir() const { return root / "scans"; }
    std::filesystem::path scan(std::int64_t id) const;
    std::filesystem::path ground_truth() const { return root / "gt.txt"; }
};

struct SimulatedDataset {
    World world;
    std::vector<PoseRecord> poses;
    std::vector<Scan> scans;  // hits in the sensor frame, origin = pose
};

struct SimulationSpec {
    std::uint64_t seed = 0;
    std::size_t scan_count = 20;
    RayPattern rays;
    double max_range = 12.0;
    double noise_sigma = 0.05;
};

// Toy room plus `scan_count` scans taken around the survey loop. Deterministic given the settings.
SimulatedDataset simulate_dataset(const SimulationSpec& spec);

// Writes poses, scans and the ground-truth grid at `resolution`.
void write_dataset(const DatasetPaths& paths, const SimulatedDataset& data, double resolution);

// Scans in pose order. Throws ParseError when a pose has no scan file or a scan file has no
// pose.
std::vector<Scan> load_scans(const DatasetPaths& paths, std::size_t num_classes);

// Per-scan insertion time in seconds.
using ScanTimer = std::function<void(std::size_t index, double seconds)>;

SemanticMap build_map(const MapConfig& config, const std::vector<Scan>& scans,
                      const ScanTimer& on_scan = {});

}  // namespace sbki
