#include "sbki/config.hpp"

#include <cmath>

namespace sbki {

const char* to_string(MapMode mode) {
    return mode == MapMode::csm ? "csm" : "bki";
}

MapMode parse_mode(const std::string& text) {
    if (text == "csm") return MapMode::csm;
    if (text == "bki") return MapMode::bki;
    throw InvalidArgument("unknown map mode '" + text + "' (expected csm or bki)");
}

MapConfig MapConfig::defaults_for(MapMode mode) {
    MapConfig c;
    c.mode = mode;
    c.block_depth = mode == MapMode::bki ? 3 : 1;
    return c;
}

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument(what);
}

}  // namespace

double MapConfig::free_spacing() const {
    if (spacing > 0.0) return spacing;
    return mode == MapMode::bki ? kBkiFreeSpacing : resolution;
}

double MapConfig::evidence_floor() const {
    return evidence_threshold * (mode == MapMode::bki ? kernel.signal_scale : 1.0);
}

void MapConfig::validate() const {
    require(resolution > 0.0 && std::isfinite(resolution), "resolution must be positive");
    require(block_depth <= 8, "block depth must be at most 8");
    require(num_classes >= 2, "num_classes must be at least 2");
    require(prior > 0.0 && std::isfinite(prior), "Dirichlet prior must be positive");
    kernel.validate();
    require(0.0 < free_thresh && free_thresh < occ_thresh && occ_thresh < 1.0,
            "thresholds must satisfy 0 < free_thresh < occ_thresh < 1");
    require(evidence_threshold >= 0.0, "evidence threshold must be non-negative");
    require(!variance_threshold || *variance_threshold >= 0.0,
            "variance threshold must be non-negative");
    require(spacing >= 0.0, "free-space spacing must be non-negative");
    require(min_range >= 0.0 && max_range > min_range, "range limits must satisfy 0 <= min < max");
    require(ds_resolution >= 0.0, "downsampling resolution must be non-negative");
    require(thread_count >= 1, "thread count must be at least 1");
    if (mode == MapMode::bki) {
        require(kernel.length_scale <= block_size(),
                "kernel length-scale " + std::to_string(kernel.length_scale) +
                    " m exceeds block size " + std::to_string(block_size()) +
                    " m; increase block depth or shrink l");
    }
}

}  // namespace sbki
