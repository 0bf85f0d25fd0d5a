#include "sbki/dirichlet.hpp"

#include <cmath>
#include <numeric>

#include "sbki/config.hpp"

namespace sbki {

DirichletParams::DirichletParams(std::size_t num_classes, double prior)
    : alpha_(num_classes, prior) {
    if (num_classes < 2) throw InvalidArgument("Dirichlet needs K >= 2");
    if (!(prior > 0.0) || !std::isfinite(prior)) {
        throw InvalidArgument("Dirichlet prior must be positive and finite");
    }
}

DirichletParams::DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)) {
    if (alpha_.size() < 2) throw InvalidArgument("Dirichlet needs K >= 2");
    for (double a : alpha_) {
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw InvalidArgument("concentration parameters must be positive and finite");
        }
    }
}

double DirichletParams::total() const {
    return std::accumulate(alpha_.begin(), alpha_.end(), 0.0);
}

void DirichletParams::add(ClassId k, double weight) {
    if (k >= alpha_.size()) throw InvalidArgument("class id out of range");
    if (!(weight >= 0.0)) throw InvalidArgument("evidence weight must be non-negative");
    alpha_[k] += weight;
}

DirichletParams csm_update(DirichletParams cell, std::span<const LabeledPoint> points) {
    for (const auto& p : points) {
        if (p.label.size() != cell.size()) {
            throw InvalidArgument("label dimension " + std::to_string(p.label.size()) +
                                  " does not match K=" + std::to_string(cell.size()));
        }
    }
    for (const auto& p : points) cell.add(p.label.index(), 1.0);
    return cell;
}

std::optional<std::vector<double>> posterior_mode(std::span<const double> alpha) {
    const double k = static_cast<double>(alpha.size());
    double sum = 0.0;
    for (double a : alpha) {
        if (!(a > 1.0)) return std::nullopt;
        sum += a;
    }
    std::vector<double> mode(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) mode[i] = (alpha[i] - 1.0) / (sum - k);
    return mode;
}

std::vector<double> posterior_mean(std::span<const double> alpha) {
    const double sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    std::vector<double> mean(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) mean[i] = alpha[i] / sum;
    return mean;
}

std::vector<double> posterior_variance(std::span<const double> alpha) {
    const double sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    std::vector<double> var(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        const double m = alpha[i] / sum;
        var[i] = m * (1.0 - m) / (sum + 1.0);
    }
    return var;
}

ClassId argmax(std::span<const double> values) {
    ClassId best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = static_cast<ClassId>(i);
    }
    return best;
}

CellStats cell_stats(std::span<const double> alpha, const MapConfig& config) {
    CellStats s;
    s.mean = posterior_mean(alpha);
    s.variance = posterior_variance(alpha);
    s.mode = posterior_mode(alpha);
    s.argmax_class = argmax(s.mean);

    // Every non-free class counts toward occupancy.
    s.occupied_prob = 0.0;
    for (std::size_t k = 1; k < s.mean.size(); ++k) s.occupied_prob += s.mean[k];

    const double total = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    s.evidence = total - config.prior * static_cast<double>(alpha.size());

    if (s.occupied_prob < config.free_thresh) {
        s.state = CellState::Free;
    } else if (s.occupied_prob > config.occ_thresh) {
        s.state = CellState::Occupied;
    } else {
        s.state = CellState::Unknown;
    }
    if (s.evidence < config.evidence_floor()) s.state = CellState::Unknown;
    if (config.variance_threshold && s.variance[s.argmax_class] > *config.variance_threshold) {
        s.state = CellState::Unknown;
    }
    return s;
}

}  // namespace sbki
