#pragma once

#include <optional>
#include <span>
#include <initializer_list>
#include <vector>

#include "sbki/types.hpp"

namespace sbki {

struct MapConfig;

// Concentration parameters of a Dirichlet belief over K classes.
class DirichletParams {
public:
    DirichletParams(std::size_t num_classes, double prior);
    explicit DirichletParams(std::vector<double> alpha);
    DirichletParams(std::initializer_list<double> alpha)
        : DirichletParams(std::vector<double>(alpha)) {}

    std::size_t size() const { return alpha_.size(); }
    double operator[](std::size_t k) const { return alpha_[k]; }
    std::span<const double> alpha() const { return alpha_; }
    double total() const;

    // Adds non-negative evidence `weight` to class k.
    void add(ClassId k, double weight);

    bool operator==(const DirichletParams&) const = default;

private:
    std::vector<double> alpha_;
};

struct CellStats {
    std::vector<double> mean;
    std::vector<double> variance;
    std::optional<std::vector<double>> mode;
    ClassId argmax_class = 0;
    double occupied_prob = 0.0;
    double evidence = 0.0;  // sum(alpha) - sum(alpha_0)
    CellState state = CellState::Unknown;
};

// Counting update: alpha^k += sum_i y_i^k over points already binned to the cell.
DirichletParams csm_update(DirichletParams cell, std::span<const LabeledPoint> points);

// (alpha^k - 1) / (sum(alpha) - K); undefined unless every alpha^k > 1.
std::optional<std::vector<double>> posterior_mode(std::span<const double> alpha);

std::vector<double> posterior_mean(std::span<const double> alpha);

// m^k (1 - m^k) / (sum(alpha) + 1) with m the posterior mean.
std::vector<double> posterior_variance(std::span<const double> alpha);

// Lowest index wins ties.
ClassId argmax(std::span<const double> values);

CellStats cell_stats(std::span<const double> alpha, const MapConfig& config);

inline CellStats cell_stats(const DirichletParams& cell, const MapConfig& config) {
    return cell_stats(cell.alpha(), config);
}

}  // namespace sbki
