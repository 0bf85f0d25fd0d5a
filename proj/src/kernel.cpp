#include "sbki/kernel.hpp"

#include <cmath>
#include <numbers>

namespace sbki {

void KernelConfig::validate() const {
    if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
        throw InvalidArgument("kernel length-scale must be positive");
    }
    if (!(signal_scale > 0.0) || !std::isfinite(signal_scale)) {
        throw InvalidArgument("kernel signal scale must be positive");
    }
}

double sparse_kernel(double distance, const KernelConfig& config) {
    if (distance >= config.length_scale) return 0.0;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double r = distance / config.length_scale;
    const double value = (2.0 + std::cos(two_pi * r)) / 3.0 * (1.0 - r) + std::sin(two_pi * r) / two_pi;
    // Rounding can leave a tiny negative residue right below the support edge.
    return config.signal_scale * std::max(value, 0.0);
}

DirichletParams bki_accumulate(const Vec3& query, DirichletParams cell,
                               std::span<const LabeledPoint> training,
                               const KernelConfig& config) {
    for (const auto& p : training) {
        if (p.label.size() != cell.size()) {
            throw InvalidArgument("label dimension " + std::to_string(p.label.size()) +
                                  " does not match K=" + std::to_string(cell.size()));
        }
    }
    for (const auto& p : training) {
        const double k = sparse_kernel((query - p.position).norm(), config);
        if (k > 0.0) cell.add(p.label.index(), k);
    }
    return cell;
}

}  // namespace sbki
