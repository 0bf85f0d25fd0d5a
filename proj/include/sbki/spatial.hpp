#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "sbki/types.hpp"

namespace sbki {

struct MapConfig;

// Global voxel lattice coordinate at map resolution.
struct VoxelIndex {
    std::int64_t x = 0, y = 0, z = 0;
    auto operator<=>(const VoxelIndex&) const = default;
};

// Block lattice coordinate; a block spans 2^depth voxels per axis.
struct BlockKey {
    std::int64_t ix = 0, iy = 0, iz = 0;
    auto operator<=>(const BlockKey&) const = default;
};

struct BlockKeyHash {
    std::size_t operator()(const BlockKey& k) const noexcept {
        std::uint64_t h = static_cast<std::uint64_t>(k.ix) * 0x9E3779B97F4A7C15ULL;
        h ^= static_cast<std::uint64_t>(k.iy) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
        h ^= static_cast<std::uint64_t>(k.iz) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

struct GridGeometry {
    double resolution = 0.1;
    unsigned depth = 3;

    std::int64_t cells_per_axis() const { return std::int64_t{1} << depth; }
    std::size_t cell_count() const { return std::size_t{1} << (3 * depth); }
    double block_size() const { return resolution * static_cast<double>(cells_per_axis()); }
};

GridGeometry geometry_of(const MapConfig& config);

// Points on a voxel face belong to the higher-indexed voxel.
VoxelIndex voxel_of(const Vec3& position, double resolution);
Vec3 voxel_centroid(const VoxelIndex& voxel, double resolution);

BlockKey block_of_voxel(const VoxelIndex& voxel, unsigned depth);
BlockKey block_key_of(const Vec3& position, const GridGeometry& geometry);
BlockKey block_key_of(const Vec3& position, const MapConfig& config);

// 3D Morton (Z-order) interleave of local coordinates, x in the lowest bit.
std::uint32_t morton_encode(std::uint32_t x, std::uint32_t y, std::uint32_t z);
std::array<std::uint32_t, 3> morton_decode(std::uint32_t code);

// Squared Euclidean distance from a point to the closed volume of a block.
double squared_distance_to_block(const Vec3& position, const BlockKey& key,
                                 const GridGeometry& geometry);

// Dense octree of cells for one block. Cell i holds K concentration parameters and is
// addressed in Morton order.
class CellGrid {
public:
    CellGrid(BlockKey key, GridGeometry geometry, std::size_t num_classes, double prior);

    const BlockKey& key() const { return key_; }
    const GridGeometry& geometry() const { return geometry_; }
    std::size_t num_classes() const { return num_classes_; }
    std::size_t cell_count() const { return geometry_.cell_count(); }

    std::span<double> alpha(std::size_t cell) {
        return {alpha_.data() + cell * num_classes_, num_classes_};
    }
    std::span<const double> alpha(std::size_t cell) const {
        return {alpha_.data() + cell * num_classes_, num_classes_};
    }
    std::span<double> data() { return alpha_; }
    std::span<const double> data() const { return alpha_; }

    VoxelIndex origin_voxel() const;
    VoxelIndex voxel(std::size_t cell) const;
    Vec3 centroid(std::size_t cell) const;
    Vec3 min_corner() const;
    Vec3 max_corner() const;

    // Throws InvalidArgument when the position lies outside this block.
    std::size_t cell_index_of(const Vec3& position) const;
    std::size_t cell_index_of(const VoxelIndex& voxel) const;

private:
    BlockKey key_;
    GridGeometry geometry_;
    std::size_t num_classes_;
    std::vector<double> alpha_;
};

// A block together with its six face-adjacent neighbours.
struct ExtendedBlock {
    BlockKey center;
    std::array<BlockKey, 6> neighbors;

    static ExtendedBlock around(const BlockKey& center);
    std::array<BlockKey, 7> keys() const;
    bool contains(const BlockKey& key) const;
};

// Points whose position falls inside any of the seven blocks, in input order.
std::vector<LabeledPoint> gather_training(std::span<const LabeledPoint> points,
                                          const ExtendedBlock& target,
                                          const GridGeometry& geometry);

}  // namespace sbki
