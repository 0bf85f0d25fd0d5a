#include "sbki/ply.hpp"

#include <charconv>

#include <algorithm>
#include <cmath>

#include "sbki/io.hpp"

namespace sbki {

namespace {

constexpr std::array<Rgb, 20> kPalette{{
    {220, 220, 220},  // 0 free
    {128, 64, 128},   // 1 ground
    {250, 170, 30},   // 2 wall
    {0, 130, 200},    // 3 cylinder
    {220, 20, 60},    {107, 142, 35}, {70, 130, 180}, {152, 251, 152}, {255, 0, 0},
    {0, 0, 142},      {119, 11, 32},  {0, 60, 100},   {0, 80, 100},    {190, 153, 153},
    {153, 153, 153},  {250, 170, 160}, {102, 102, 156}, {244, 35, 232}, {81, 0, 81},
    {230, 150, 140},
}};

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

ColorMode parse_color_mode(const std::string& text) {
    if (text == "semantic") return ColorMode::semantic;
    if (text == "variance") return ColorMode::variance;
    if (text == "occupancy") return ColorMode::occupancy;
    throw InvalidArgument("unknown export mode '" + text + "' (expected semantic, variance or occupancy)");
}

Rgb class_color(ClassId id) {
    if (id < kPalette.size()) return kPalette[id];
    return kPalette[1 + (id - 1) % (kPalette.size() - 1)];
}

Rgb jet(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const double r = std::clamp(1.5 - std::abs(4.0 * t - 3.0), 0.0, 1.0);
    const double g = std::clamp(1.5 - std::abs(4.0 * t - 2.0), 0.0, 1.0);
    const double b = std::clamp(1.5 - std::abs(4.0 * t - 1.0), 0.0, 1.0);
    return Rgb{to_byte(r), to_byte(g), to_byte(b)};
}

namespace {

// Vertices are declared as float, so print the shortest text of the float value.
std::string format_float(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof(buf), static_cast<float>(v));
    return std::string(buf, r.ptr);
}

}  // namespace

std::string format_ply(std::span<const ExportedCell> cells, ColorMode mode) {
    double max_var = 0.0;
    for (const auto& c : cells) max_var = std::max(max_var, c.stats.variance[c.stats.argmax_class]);

    std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cells.size()) +
                      "\nproperty float x\nproperty float y\nproperty float z\n"
                      "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
    for (const auto& c : cells) {
        Rgb color;
        switch (mode) {
        case ColorMode::semantic: color = class_color(c.stats.argmax_class); break;
        case ColorMode::variance: {
            const double v = c.stats.variance[c.stats.argmax_class];
            color = jet(max_var > 0.0 ? v / max_var : 0.0);
            break;
        }
        case ColorMode::occupancy: {
            const auto g = to_byte(c.stats.occupied_prob);
            color = Rgb{g, g, g};
            break;
        }
        }
        out += format_float(c.centroid.x()) + " " + format_float(c.centroid.y()) + " " +
               format_float(c.centroid.z()) + " " + std::to_string(color.r) + " " +
               std::to_string(color.g) + " " + std::to_string(color.b) + "\n";
    }
    return out;
}

void write_ply(const std::filesystem::path& path, std::span<const ExportedCell> cells, ColorMode mode) {
    write_atomic(path, format_ply(cells, mode));
}

}  // namespace sbki
