#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "sbki/config.hpp"
#include "sbki/dirichlet.hpp"
#include "sbki/sensor.hpp"
#include "sbki/spatial.hpp"

namespace sbki {

enum class CellFilter : std::uint8_t { all, occupied, free };

CellFilter parse_filter(const std::string& text);

struct ExportedCell {
    BlockKey block;
    std::size_t index = 0;
    Vec3 centroid = Vec3::Zero();
    CellStats stats;
};

// Voxel map of Dirichlet concentration parameters, stored as lazily allocated blocks.
//
// insert_scan is internally parallel over blocks: training points are first bucketed per
// block on the calling thread, then each block is updated by exactly one worker in the
// input order of its points. Results therefore do not depend on thread_count. Callers must
// serialise insert_scan against each other and against readers.
class SemanticMap {
public:
    explicit SemanticMap(MapConfig config);

    const MapConfig& config() const { return config_; }
    GridGeometry geometry() const { return geometry_of(config_); }

    // Expands the scan and applies its evidence. A label >= K throws before the map changes.
    void insert_scan(const Scan& scan);
    // Applies already expanded, map-frame training points as one update epoch.
    void insert_training(std::span<const LabeledPoint> training);

    std::optional<CellStats> query_point(const Vec3& position) const;
    std::vector<ExportedCell> export_cells(CellFilter filter) const;

    const CellGrid* find_block(const BlockKey& key) const;
    // Allocates a prior-initialised block if needed.
    CellGrid& block(const BlockKey& key);
    std::vector<BlockKey> sorted_keys() const;
    std::size_t block_count() const { return blocks_.size(); }

    std::uint64_t scan_count() const { return scan_count_; }
    void set_scan_count(std::uint64_t n) { scan_count_ = n; }

private:
    using BlockMap = std::unordered_map<BlockKey, CellGrid, BlockKeyHash>;
    struct Job {
        CellGrid* grid;
        const std::vector<std::uint32_t>* points;
    };

    void update_csm(std::span<const LabeledPoint> training);
    void update_bki(std::span<const LabeledPoint> training);
    void run_jobs(const std::vector<Job>& jobs, std::span<const LabeledPoint> training,
                  bool kernel) const;
    void check_labels(std::span<const LabeledPoint> training) const;

    MapConfig config_;
    BlockMap blocks_;
    std::uint64_t scan_count_ = 0;
};

}  // namespace sbki
