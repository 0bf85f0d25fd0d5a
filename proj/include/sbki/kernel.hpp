#pragma once

#include <span>

#include "sbki/dirichlet.hpp"

namespace sbki {

struct KernelConfig {
    double length_scale = 0.3;  // support radius [m]
    double signal_scale = 0.1;  // kernel value at zero distance

    void validate() const;
};

// Compactly supported kernel of Melkumyan and Ramos:
//   s0 * [ (2 + cos(2 pi r)) / 3 * (1 - r) + sin(2 pi r) / (2 pi) ],  r = d / l < 1
// and exactly zero for d >= l.
double sparse_kernel(double distance, const KernelConfig& config);

// alpha^k += sum_i k(|query - x_i|) y_i^k
DirichletParams bki_accumulate(const Vec3& query, DirichletParams cell,
                               std::span<const LabeledPoint> training,
                               const KernelConfig& config);

}  // namespace sbki
