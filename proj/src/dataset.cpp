#include "sbki/dataset.hpp"

#include <chrono>
#include <cstdio>
#include <set>


namespace sbki {

namespace fs = std::filesystem;

fs::path DatasetPaths::scan(std::int64_t id) const {
    char name[32];
    std::snprintf(name, sizeof(name), "scan_%06lld.txt", static_cast<long long>(id));
    return scans_dir() / name;
}

SimulatedDataset simulate_dataset(const SimulationSpec& spec) {
    if (spec.scan_count == 0) throw InvalidArgument("scan count must be at least 1");
    SimulatedDataset data;
    data.world = make_toy_world(spec.seed);
    for (std::size_t i = 0; i < spec.scan_count; ++i) {
        const Pose pose = survey_pose(data.world, i, spec.scan_count);
        SimulationOptions opts;
        opts.max_range = spec.max_range;
        opts.noise_sigma = spec.noise_sigma;
        opts.seed = spec.seed * 1000003ULL + i;
        data.poses.push_back(PoseRecord{static_cast<std::int64_t>(i), pose});
        data.scans.push_back(simulate_scan(data.world, pose, spec.rays, opts));
    }
    return data;
}

void write_dataset(const DatasetPaths& paths, const SimulatedDataset& data, double resolution) {
    fs::create_directories(paths.scans_dir());
    for (std::size_t i = 0; i < data.scans.size(); ++i) {
        write_scan_file(paths.scan(data.poses[i].scan_id), data.scans[i].hits);
    }
    write_pose_file(paths.poses(), data.poses);
    write_ground_truth(paths.ground_truth(), ground_truth_grid(data.world, resolution));
}

std::vector<Scan> load_scans(const DatasetPaths& paths, std::size_t num_classes) {
    const auto poses = read_pose_file(paths.poses());
    std::set<fs::path> expected;
    std::vector<Scan> scans;
    for (const auto& rec : poses) {
        const fs::path file = paths.scan(rec.scan_id);
        if (!fs::exists(file)) {
            throw ParseError(paths.poses().string() + ": no scan file for pose " +
                             std::to_string(rec.scan_id) + " (expected " + file.string() + ")");
        }
        expected.insert(file.filename());
        scans.push_back(Scan{rec.pose, read_scan_file(file, num_classes)});
    }
    if (fs::is_directory(paths.scans_dir())) {
        for (const auto& entry : fs::directory_iterator(paths.scans_dir())) {
            const auto name = entry.path().filename();
            if (name.extension() == ".txt" && !expected.count(name)) {
                throw ParseError(entry.path().string() + ": scan has no pose in " + paths.poses().string());
            }
        }
    }
    return scans;
}

SemanticMap build_map(const MapConfig& config, const std::vector<Scan>& scans, const ScanTimer& on_scan) {
    SemanticMap map(config);
    for (std::size_t i = 0; i < scans.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        map.insert_scan(scans[i]);
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        if (on_scan) on_scan(i, dt.count());
    }
    return map;
}

}  // namespace sbki
