#include "sbki/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sbki {

namespace fs = std::filesystem;

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text) {
    double value = 0.0;
    const char* first = text.data();
    if (!text.empty() && text.front() == '+') ++first;
    const auto res = std::from_chars(first, text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(value)) {
        throw ParseError("invalid number '" + std::string(text) + "'");
    }
    return value;
}

namespace {

std::uint64_t parse_uint(std::string_view text) {
    std::uint64_t value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ParseError("invalid non-negative integer '" + std::string(text) + "'");
    }
    return value;
}

std::int64_t parse_int(std::string_view text) {
    std::int64_t value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ParseError("invalid integer '" + std::string(text) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

// Calls fn(line_number, tokens) for every non-blank, non-comment line; prefixes errors.
template <typename Fn>
void for_each_record(std::string_view text, const std::string& source, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        const std::string_view line = text.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        const auto tokens = split(line);
        if (!tokens.empty() && tokens.front().front() != '#') {
            try {
                fn(line_no, tokens);
            } catch (const std::exception& e) {
                throw ParseError(source + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
        if (end == text.size()) break;
    }
}

}  // namespace

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_atomic(const fs::path& path, std::string_view contents) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------------------
// Scan files

std::vector<Hit> parse_scan(std::string_view text, std::size_t num_classes, const std::string& source) {
    std::vector<Hit> hits;
    for_each_record(text, source, [&](std::size_t, const std::vector<std::string_view>& t) {
        Hit hit;
        if (t.size() == 4) {
            hit.position = Vec3(parse_double(t[0]), parse_double(t[1]), parse_double(t[2]));
            const std::uint64_t label = parse_uint(t[3]);
            if (label >= num_classes) {
                throw ParseError("label " + std::to_string(label) + " >= K=" + std::to_string(num_classes));
            }
            hit.label = static_cast<ClassId>(label);
        } else if (t.size() == 3 + num_classes) {
            hit.position = Vec3(parse_double(t[0]), parse_double(t[1]), parse_double(t[2]));
            SoftLabel soft(num_classes);
            double sum = 0.0;
            for (std::size_t k = 0; k < num_classes; ++k) {
                soft[k] = parse_double(t[3 + k]);
                if (soft[k] < 0.0) throw ParseError("negative class probability");
                sum += soft[k];
            }
            if (std::abs(sum - 1.0) > 1e-6) throw ParseError("soft label does not sum to 1");
            hit.label = std::move(soft);
        } else {
            throw ParseError("expected 4 or " + std::to_string(3 + num_classes) + " columns, got " +
                             std::to_string(t.size()));
        }
        hits.push_back(std::move(hit));
    });
    return hits;
}

std::vector<Hit> read_scan_file(const fs::path& path, std::size_t num_classes) {
    return parse_scan(read_text_file(path), num_classes, path.string());
}

std::string format_scan(std::span<const Hit> hits) {
    std::string out;
    out.reserve(hits.size() * 48);
    for (const auto& h : hits) {
        out += format_double(h.position.x());
        out += ' ';
        out += format_double(h.position.y());
        out += ' ';
        out += format_double(h.position.z());
        if (const auto* id = std::get_if<ClassId>(&h.label)) {
            out += ' ';
            out += std::to_string(*id);
        } else {
            for (double p : std::get<SoftLabel>(h.label)) {
                out += ' ';
                out += format_double(p);
            }
        }
        out += '\n';
    }
    return out;
}

void write_scan_file(const fs::path& path, std::span<const Hit> hits) {
    write_atomic(path, format_scan(hits));
}

// ---------------------------------------------------------------------------------------
// Pose files

std::vector<PoseRecord> parse_poses(std::string_view text, const std::string& source) {
    std::vector<PoseRecord> poses;
    for_each_record(text, source, [&](std::size_t, const std::vector<std::string_view>& t) {
        if (t.size() != 8) {
            throw ParseError("expected 8 columns (id tx ty tz qx qy qz qw), got " + std::to_string(t.size()));
        }
        PoseRecord r;
        r.scan_id = parse_int(t[0]);
        if (!poses.empty() && r.scan_id <= poses.back().scan_id) {
            throw ParseError("scan ids must be strictly increasing");
        }
        r.pose.translation = Vec3(parse_double(t[1]), parse_double(t[2]), parse_double(t[3]));
        Eigen::Quaterniond q(parse_double(t[7]), parse_double(t[4]), parse_double(t[5]), parse_double(t[6]));
        if (std::abs(q.norm() - 1.0) > 1e-6) throw ParseError("quaternion is not unit length");
        // Leave already-unit quaternions untouched so that files round-trip bit for bit.
        if (std::abs(q.squaredNorm() - 1.0) > 1e-12) q.normalize();
        r.pose.rotation = q;
        poses.push_back(r);
    });
    return poses;
}

std::vector<PoseRecord> read_pose_file(const fs::path& path) {
    return parse_poses(read_text_file(path), path.string());
}

std::string format_poses(std::span<const PoseRecord> poses) {
    std::string out;
    for (const auto& r : poses) {
        const auto& t = r.pose.translation;
        const auto& q = r.pose.rotation;
        out += std::to_string(r.scan_id);
        for (double v : {t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w()}) {
            out += ' ';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

void write_pose_file(const fs::path& path, std::span<const PoseRecord> poses) {
    write_atomic(path, format_poses(poses));
}

// ---------------------------------------------------------------------------------------
// Map files

namespace {

template <typename T>
void put(std::string& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.append(bytes.data(), sizeof(T));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        if (bytes_.size() - pos_ < sizeof(T)) throw ParseError("map file is truncated");
        std::array<char, sizeof(T)> raw;
        std::memcpy(raw.data(), bytes_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
        pos_ += sizeof(T);
        T value;
        std::memcpy(&value, raw.data(), sizeof(T));
        return value;
    }

    std::string_view take(std::size_t n) {
        if (bytes_.size() - pos_ < n) throw ParseError("map file is truncated");
        const auto view = bytes_.substr(pos_, n);
        pos_ += n;
        return view;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string encode_map(const SemanticMap& map) {
    const MapConfig& c = map.config();
    std::string out(kMapMagic);
    put<double>(out, c.resolution);
    put<std::uint32_t>(out, c.block_depth);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.num_classes));
    put<double>(out, c.kernel.length_scale);
    put<double>(out, c.kernel.signal_scale);
    put<double>(out, c.prior);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(c.mode));
    const auto keys = map.sorted_keys();
    put<std::uint64_t>(out, keys.size());
    for (const auto& key : keys) {
        put<std::int64_t>(out, key.ix);
        put<std::int64_t>(out, key.iy);
        put<std::int64_t>(out, key.iz);
        for (double a : map.find_block(key)->data()) put<double>(out, a);
    }
    return out;
}

SemanticMap decode_map(std::string_view bytes, const MapConfig& base) {
    Reader in(bytes);
    if (in.take(kMapMagic.size()) != kMapMagic) throw ParseError("not a map file (bad magic)");
    MapConfig c = base;
    c.resolution = in.get<double>();
    c.block_depth = in.get<std::uint32_t>();
    c.num_classes = in.get<std::uint32_t>();
    c.kernel.length_scale = in.get<double>();
    c.kernel.signal_scale = in.get<double>();
    c.prior = in.get<double>();
    const auto mode = in.get<std::uint8_t>();
    if (mode > 1) throw ParseError("map file has unknown mode " + std::to_string(mode));
    c.mode = static_cast<MapMode>(mode);
    const auto block_count = in.get<std::uint64_t>();
    if (c.block_depth > 8) throw ParseError("map file block depth is out of range");

    SemanticMap map = [&] {
        try {
            return SemanticMap(c);
        } catch (const InvalidArgument& e) {
            throw ParseError(std::string("map file header is invalid: ") + e.what());
        }
    }();
    const std::size_t per_block = geometry_of(c).cell_count() * c.num_classes;
    if (block_count > in.remaining() / (24 + 8 * per_block)) throw ParseError("map file is truncated");
    for (std::uint64_t b = 0; b < block_count; ++b) {
        BlockKey key;
        key.ix = in.get<std::int64_t>();
        key.iy = in.get<std::int64_t>();
        key.iz = in.get<std::int64_t>();
        if (map.find_block(key)) throw ParseError("map file repeats a block");
        auto alpha = map.block(key).data();
        for (double& a : alpha) {
            a = in.get<double>();
            if (!(a > 0.0) || !std::isfinite(a)) throw ParseError("map file holds a non-positive alpha");
        }
    }
    if (in.remaining() != 0) throw ParseError("map file has trailing bytes");
    return map;
}

void write_map_file(const fs::path& path, const SemanticMap& map) {
    write_atomic(path, encode_map(map));
}

SemanticMap read_map_file(const fs::path& path, const MapConfig& base) {
    try {
        return decode_map(read_text_file(path), base);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------------------
// Ground truth

std::string format_ground_truth(const GroundTruthGrid& grid) {
    std::string out = "# sbki ground truth\n";
    out += "# resolution " + format_double(grid.resolution()) + "\n";
    const auto& m = grid.min_voxel();
    const auto& d = grid.dims();
    out += "# min_voxel " + std::to_string(m.x) + " " + std::to_string(m.y) + " " + std::to_string(m.z) + "\n";
    out += "# dims " + std::to_string(d.x) + " " + std::to_string(d.y) + " " + std::to_string(d.z) + "\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.label(i) == kFreeClass) continue;
        const Vec3 c = grid.centroid(i);
        out += format_double(c.x()) + " " + format_double(c.y()) + " " + format_double(c.z()) + " " +
               std::to_string(grid.label(i)) + "\n";
    }
    return out;
}

GroundTruthGrid parse_ground_truth(std::string_view text, const std::string& source) {
    std::optional<double> resolution;
    std::optional<VoxelIndex> min_voxel, dims;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        const auto tokens = split(text.substr(pos, end - pos));
        ++line_no;
        pos = end + 1;
        if (tokens.empty() || tokens[0] != "#" || tokens.size() < 2) continue;
        try {
            if (tokens[1] == "resolution" && tokens.size() == 3) {
                resolution = parse_double(tokens[2]);
            } else if ((tokens[1] == "min_voxel" || tokens[1] == "dims") && tokens.size() == 5) {
                const VoxelIndex v{parse_int(tokens[2]), parse_int(tokens[3]), parse_int(tokens[4])};
                (tokens[1] == "dims" ? dims : min_voxel) = v;
            }
        } catch (const std::exception& e) {
            throw ParseError(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!resolution || !min_voxel || !dims || !(*resolution > 0.0) || dims->x <= 0 || dims->y <= 0 ||
        dims->z <= 0) {
        throw ParseError(source + ": missing or invalid ground-truth header");
    }
    GroundTruthGrid grid(*resolution, *min_voxel, *dims);
    for_each_record(text, source, [&](std::size_t, const std::vector<std::string_view>& t) {
        if (t.size() != 4) throw ParseError("expected 4 columns (x y z label)");
        const Vec3 p(parse_double(t[0]), parse_double(t[1]), parse_double(t[2]));
        const auto idx = grid.index_of(voxel_of(p, *resolution));
        if (!idx) throw ParseError("cell lies outside the declared grid");
        grid.set_label(*idx, static_cast<ClassId>(parse_uint(t[3])));
    });
    return grid;
}

void write_ground_truth(const fs::path& path, const GroundTruthGrid& grid) {
    write_atomic(path, format_ground_truth(grid));
}

GroundTruthGrid read_ground_truth(const fs::path& path) {
    return parse_ground_truth(read_text_file(path), path.string());
}

}  // namespace sbki
