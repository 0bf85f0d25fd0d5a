#include "sbki/semantic_map.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "sbki/kernel.hpp"

namespace sbki {

CellFilter parse_filter(const std::string& text) {
    if (text == "all") return CellFilter::all;
    if (text == "occupied") return CellFilter::occupied;
    if (text == "free") return CellFilter::free;
    throw InvalidArgument("unknown cell filter '" + text + "' (expected all, occupied or free)");
}

SemanticMap::SemanticMap(MapConfig config) : config_(std::move(config)) {
    config_.validate();
}

void SemanticMap::check_labels(std::span<const LabeledPoint> training) const {
    for (const auto& p : training) {
        if (p.label.size() != config_.num_classes || p.label.index() >= config_.num_classes) {
            throw InvalidArgument("training label does not match map class count");
        }
        if (!p.position.allFinite()) throw InvalidArgument("training point is not finite");
    }
}

void SemanticMap::insert_scan(const Scan& scan) {
    const auto training = expand_scan(scan, config_);
    insert_training(training);
}

void SemanticMap::insert_training(std::span<const LabeledPoint> training) {
    check_labels(training);
    if (config_.mode == MapMode::csm) {
        update_csm(training);
    } else {
        update_bki(training);
    }
    ++scan_count_;
}

CellGrid& SemanticMap::block(const BlockKey& key) {
    auto it = blocks_.find(key);
    if (it == blocks_.end()) {
        it = blocks_
                 .try_emplace(key, key, geometry(), config_.num_classes, config_.prior)
                 .first;
    }
    return it->second;
}

const CellGrid* SemanticMap::find_block(const BlockKey& key) const {
    const auto it = blocks_.find(key);
    return it == blocks_.end() ? nullptr : &it->second;
}

std::vector<BlockKey> SemanticMap::sorted_keys() const {
    std::vector<BlockKey> keys;
    keys.reserve(blocks_.size());
    for (const auto& [key, grid] : blocks_) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    return keys;
}

void SemanticMap::update_csm(std::span<const LabeledPoint> training) {
    const GridGeometry g = geometry();
    std::unordered_map<BlockKey, std::vector<std::uint32_t>, BlockKeyHash> buckets;
    for (std::size_t i = 0; i < training.size(); ++i) {
        buckets[block_key_of(training[i].position, g)].push_back(static_cast<std::uint32_t>(i));
    }
    std::vector<Job> jobs;
    jobs.reserve(buckets.size());
    for (const auto& [key, indices] : buckets) jobs.push_back(Job{&block(key), &indices});
    run_jobs(jobs, training, false);
}

void SemanticMap::update_bki(std::span<const LabeledPoint> training) {
    const GridGeometry g = geometry();
    const double l = config_.kernel.length_scale;
    std::unordered_map<BlockKey, std::vector<std::uint32_t>, BlockKeyHash> buckets;

    if (config_.training_region == TrainingRegion::kernel_support) {
        // A point feeds every block it can reach with non-zero kernel weight.
        const auto reach = static_cast<std::int64_t>(std::ceil(l / g.block_size()));
        for (std::size_t i = 0; i < training.size(); ++i) {
            const Vec3& p = training[i].position;
            const BlockKey home = block_key_of(p, g);
            for (std::int64_t dx = -reach; dx <= reach; ++dx) {
                for (std::int64_t dy = -reach; dy <= reach; ++dy) {
                    for (std::int64_t dz = -reach; dz <= reach; ++dz) {
                        const BlockKey key{home.ix + dx, home.iy + dy, home.iz + dz};
                        if (squared_distance_to_block(p, key, g) < l * l) {
                            buckets[key].push_back(static_cast<std::uint32_t>(i));
                        }
                    }
                }
            }
        }
    } else {
        // A point feeds every block whose extended block contains it.
        for (std::size_t i = 0; i < training.size(); ++i) {
            const ExtendedBlock ext = ExtendedBlock::around(block_key_of(training[i].position, g));
            for (const BlockKey& key : ext.keys()) {
                buckets[key].push_back(static_cast<std::uint32_t>(i));
            }
        }
    }

    std::vector<Job> jobs;
    jobs.reserve(buckets.size());
    for (const auto& [key, indices] : buckets) jobs.push_back(Job{&block(key), &indices});
    run_jobs(jobs, training, true);
}

namespace {

void apply_counts(CellGrid& grid, std::span<const LabeledPoint> training,
                  const std::vector<std::uint32_t>& indices) {
    for (const std::uint32_t i : indices) {
        const auto& p = training[i];
        grid.alpha(grid.cell_index_of(p.position))[p.label.index()] += 1.0;
    }
}

void apply_kernel(CellGrid& grid, std::span<const LabeledPoint> training,
                  const std::vector<std::uint32_t>& indices, const KernelConfig& kernel) {
    const GridGeometry& g = grid.geometry();
    const double l = kernel.length_scale;
    const double l2 = l * l;
    const std::int64_t n = g.cells_per_axis();
    const VoxelIndex origin = grid.origin_voxel();
    const std::int64_t o[3] = {origin.x, origin.y, origin.z};

    for (const std::uint32_t i : indices) {
        const auto& p = training[i];
        // Local cell range covering the cube [p - l, p + l], clipped to the block.
        std::int64_t lo[3], hi[3];
        bool empty = false;
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::max<std::int64_t>(
                static_cast<std::int64_t>(std::floor((p.position[a] - l) / g.resolution)) - o[a], 0);
            hi[a] = std::min<std::int64_t>(
                static_cast<std::int64_t>(std::floor((p.position[a] + l) / g.resolution)) - o[a], n - 1);
            empty = empty || lo[a] > hi[a];
        }
        if (empty) continue;
        const ClassId cls = p.label.index();
        for (std::int64_t x = lo[0]; x <= hi[0]; ++x) {
            for (std::int64_t y = lo[1]; y <= hi[1]; ++y) {
                for (std::int64_t z = lo[2]; z <= hi[2]; ++z) {
                    const Vec3 c = voxel_centroid(VoxelIndex{o[0] + x, o[1] + y, o[2] + z}, g.resolution);
                    const double d2 = (c - p.position).squaredNorm();
                    if (d2 >= l2) continue;
                    const double k = sparse_kernel(std::sqrt(d2), kernel);
                    if (k > 0.0) {
                        const auto cell = morton_encode(static_cast<std::uint32_t>(x),
                                                        static_cast<std::uint32_t>(y),
                                                        static_cast<std::uint32_t>(z));
                        grid.alpha(cell)[cls] += k;
                    }
                }
            }
        }
    }
}

}  // namespace

void SemanticMap::run_jobs(const std::vector<Job>& jobs, std::span<const LabeledPoint> training,
                           bool kernel) const {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next.fetch_add(1); j < jobs.size(); j = next.fetch_add(1)) {
            if (kernel) {
                apply_kernel(*jobs[j].grid, training, *jobs[j].points, config_.kernel);
            } else {
                apply_counts(*jobs[j].grid, training, *jobs[j].points);
            }
        }
    };
    const std::size_t threads = std::min<std::size_t>(config_.thread_count, jobs.size());
    if (threads <= 1) {
        worker();
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(threads - 1);
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
}

std::optional<CellStats> SemanticMap::query_point(const Vec3& position) const {
    if (!position.allFinite()) return std::nullopt;
    const CellGrid* grid = find_block(block_key_of(position, geometry()));
    if (!grid) return std::nullopt;
    return cell_stats(grid->alpha(grid->cell_index_of(position)), config_);
}

std::vector<ExportedCell> SemanticMap::export_cells(CellFilter filter) const {
    std::vector<ExportedCell> out;
    for (const BlockKey& key : sorted_keys()) {
        const CellGrid& grid = blocks_.at(key);
        for (std::size_t i = 0; i < grid.cell_count(); ++i) {
            CellStats stats = cell_stats(grid.alpha(i), config_);
            const bool keep = filter == CellFilter::all ||
                              (filter == CellFilter::occupied && stats.state == CellState::Occupied) ||
                              (filter == CellFilter::free && stats.state == CellState::Free);
            if (keep) out.push_back(ExportedCell{key, i, grid.centroid(i), std::move(stats)});
        }
    }
    return out;
}

}  // namespace sbki
