#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "sbki/semantic_map.hpp"

namespace sbki {

enum class ColorMode : std::uint8_t { semantic, variance, occupancy };

ColorMode parse_color_mode(const std::string& text);

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

// Fixed palette; class ids beyond the table wrap around (skipping the free colour).
Rgb class_color(ClassId id);
// Jet colormap for t in [0, 1] (clamped).
Rgb jet(double t);

// ASCII PLY, one vertex per cell: x y z red green blue. Variance mode colours the variance
// of each cell's argmax class over [0, max variance among the cells].
std::string format_ply(std::span<const ExportedCell> cells, ColorMode mode);
void write_ply(const std::filesystem::path& path, std::span<const ExportedCell> cells, ColorMode mode);

}  // namespace sbki
