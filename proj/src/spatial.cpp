#include "sbki/spatial.hpp"

#include <algorithm>
#include <cmath>

#include "sbki/config.hpp"

namespace sbki {

GridGeometry geometry_of(const MapConfig& config) {
    return GridGeometry{config.resolution, config.block_depth};
}

VoxelIndex voxel_of(const Vec3& position, double resolution) {
    return VoxelIndex{static_cast<std::int64_t>(std::floor(position.x() / resolution)),
                      static_cast<std::int64_t>(std::floor(position.y() / resolution)),
                      static_cast<std::int64_t>(std::floor(position.z() / resolution))};
}

Vec3 voxel_centroid(const VoxelIndex& v, double resolution) {
    return Vec3((static_cast<double>(v.x) + 0.5) * resolution,
                (static_cast<double>(v.y) + 0.5) * resolution,
                (static_cast<double>(v.z) + 0.5) * resolution);
}

BlockKey block_of_voxel(const VoxelIndex& v, unsigned depth) {
    // Arithmetic shift is floor division for negative coordinates too.
    return BlockKey{v.x >> depth, v.y >> depth, v.z >> depth};
}

BlockKey block_key_of(const Vec3& position, const GridGeometry& geometry) {
    return block_of_voxel(voxel_of(position, geometry.resolution), geometry.depth);
}

BlockKey block_key_of(const Vec3& position, const MapConfig& config) {
    return block_key_of(position, geometry_of(config));
}

std::uint32_t morton_encode(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
    std::uint32_t code = 0;
    for (unsigned b = 0; b < 10; ++b) {
        code |= ((x >> b) & 1u) << (3 * b);
        code |= ((y >> b) & 1u) << (3 * b + 1);
        code |= ((z >> b) & 1u) << (3 * b + 2);
    }
    return code;
}

std::array<std::uint32_t, 3> morton_decode(std::uint32_t code) {
    std::array<std::uint32_t, 3> xyz{0, 0, 0};
    for (unsigned b = 0; b < 10; ++b) {
        xyz[0] |= ((code >> (3 * b)) & 1u) << b;
        xyz[1] |= ((code >> (3 * b + 1)) & 1u) << b;
        xyz[2] |= ((code >> (3 * b + 2)) & 1u) << b;
    }
    return xyz;
}

double squared_distance_to_block(const Vec3& p, const BlockKey& key, const GridGeometry& g) {
    const std::int64_t n = g.cells_per_axis();
    const double lo[3] = {static_cast<double>(key.ix * n) * g.resolution,
                          static_cast<double>(key.iy * n) * g.resolution,
                          static_cast<double>(key.iz * n) * g.resolution};
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double hi = lo[a] + g.block_size();
        const double v = p[a];
        const double gap = v < lo[a] ? lo[a] - v : (v > hi ? v - hi : 0.0);
        d2 += gap * gap;
    }
    return d2;
}

CellGrid::CellGrid(BlockKey key, GridGeometry geometry, std::size_t num_classes, double prior)
    : key_(key),
      geometry_(geometry),
      num_classes_(num_classes),
      alpha_(geometry.cell_count() * num_classes, prior) {}

VoxelIndex CellGrid::origin_voxel() const {
    return VoxelIndex{key_.ix << geometry_.depth, key_.iy << geometry_.depth,
                      key_.iz << geometry_.depth};
}

VoxelIndex CellGrid::voxel(std::size_t cell) const {
    const auto local = morton_decode(static_cast<std::uint32_t>(cell));
    const VoxelIndex o = origin_voxel();
    return VoxelIndex{o.x + local[0], o.y + local[1], o.z + local[2]};
}

Vec3 CellGrid::centroid(std::size_t cell) const {
    return voxel_centroid(voxel(cell), geometry_.resolution);
}

Vec3 CellGrid::min_corner() const {
    const VoxelIndex o = origin_voxel();
    return Vec3(static_cast<double>(o.x), static_cast<double>(o.y), static_cast<double>(o.z)) *
           geometry_.resolution;
}

Vec3 CellGrid::max_corner() const {
    return min_corner() + Vec3::Constant(geometry_.block_size());
}

std::size_t CellGrid::cell_index_of(const VoxelIndex& v) const {
    const VoxelIndex o = origin_voxel();
    const std::int64_t n = geometry_.cells_per_axis();
    const std::int64_t lx = v.x - o.x, ly = v.y - o.y, lz = v.z - o.z;
    if (lx < 0 || ly < 0 || lz < 0 || lx >= n || ly >= n || lz >= n) {
        throw InvalidArgument("voxel lies outside block");
    }
    return morton_encode(static_cast<std::uint32_t>(lx), static_cast<std::uint32_t>(ly),
                         static_cast<std::uint32_t>(lz));
}

std::size_t CellGrid::cell_index_of(const Vec3& position) const {
    if (!position.allFinite()) throw InvalidArgument("non-finite position");
    return cell_index_of(voxel_of(position, geometry_.resolution));
}

ExtendedBlock ExtendedBlock::around(const BlockKey& c) {
    return ExtendedBlock{c,
                         {BlockKey{c.ix - 1, c.iy, c.iz}, BlockKey{c.ix + 1, c.iy, c.iz},
                          BlockKey{c.ix, c.iy - 1, c.iz}, BlockKey{c.ix, c.iy + 1, c.iz},
                          BlockKey{c.ix, c.iy, c.iz - 1}, BlockKey{c.ix, c.iy, c.iz + 1}}};
}

std::array<BlockKey, 7> ExtendedBlock::keys() const {
    return {center,       neighbors[0], neighbors[1], neighbors[2],
            neighbors[3], neighbors[4], neighbors[5]};
}

bool ExtendedBlock::contains(const BlockKey& key) const {
    const auto all = keys();
    return std::find(all.begin(), all.end(), key) != all.end();
}

std::vector<LabeledPoint> gather_training(std::span<const LabeledPoint> points,
                                          const ExtendedBlock& target,
                                          const GridGeometry& geometry) {
    std::vector<LabeledPoint> out;
    for (const auto& p : points) {
        if (target.contains(block_key_of(p.position, geometry))) out.push_back(p);
    }
    return out;
}

}  // namespace sbki
