#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sbki/semantic_map.hpp"
#include "sbki/sensor.hpp"
#include "sbki/world.hpp"

namespace sbki {

// Malformed input file; the message carries "file:line:" when a line is at fault.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shortest text that parses back to exactly the same double; always uses '.'.
std::string format_double(double value);
double parse_double(std::string_view text);

// Writes to a sibling temporary and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

// Scan files: "x y z label" or "x y z p_0 ... p_{K-1}" per line, '#' starts a comment line.
std::vector<Hit> parse_scan(std::string_view text, std::size_t num_classes,
                            const std::string& source = "<scan>");
std::vector<Hit> read_scan_file(const std::filesystem::path& path, std::size_t num_classes);
std::string format_scan(std::span<const Hit> hits);
void write_scan_file(const std::filesystem::path& path, std::span<const Hit> hits);

// Pose files: "scan_id tx ty tz qx qy qz qw" per line, ids strictly increasing.
struct PoseRecord {
    std::int64_t scan_id = 0;
    Pose pose;
};

std::vector<PoseRecord> parse_poses(std::string_view text, const std::string& source = "<poses>");
std::vector<PoseRecord> read_pose_file(const std::filesystem::path& path);
std::string format_poses(std::span<const PoseRecord> poses);
void write_pose_file(const std::filesystem::path& path, std::span<const PoseRecord> poses);

// Binary map file, little-endian:
//   "SBKIMAP1" | resolution f64 | block_depth u32 | K u32 | l f64 | sigma0 f64 | prior f64 |
//   mode u8 | block_count u64 | blocks sorted by key: ix iy iz i64, 8^depth * K alpha f64
inline constexpr std::string_view kMapMagic = "SBKIMAP1";

std::string encode_map(const SemanticMap& map);
// Header fields override `base`; thresholds and other runtime settings come from `base`.
SemanticMap decode_map(std::string_view bytes, const MapConfig& base = {});
void write_map_file(const std::filesystem::path& path, const SemanticMap& map);
SemanticMap read_map_file(const std::filesystem::path& path, const MapConfig& base = {});

// Ground-truth grid: '#' header lines with resolution/min_voxel/dims, then "x y z label"
// for every occupied cell.
std::string format_ground_truth(const GroundTruthGrid& grid);
GroundTruthGrid parse_ground_truth(std::string_view text, const std::string& source = "<gt>");
void write_ground_truth(const std::filesystem::path& path, const GroundTruthGrid& grid);
GroundTruthGrid read_ground_truth(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace sbki
