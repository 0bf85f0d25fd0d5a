#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sbki/semantic_map.hpp"
#include "sbki/world.hpp"

namespace sbki {

// Rows are ground truth, columns predictions. An extra trailing column counts cells the map
// left unknown or never observed; it adds to each row's false negatives.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t num_classes);

    std::size_t num_classes() const { return k_; }
    void add(ClassId truth, ClassId predicted, std::uint64_t n = 1);
    void add_missed(ClassId truth, std::uint64_t n = 1);

    std::uint64_t at(ClassId truth, ClassId predicted) const { return counts_[truth * (k_ + 1) + predicted]; }
    std::uint64_t missed(ClassId truth) const { return counts_[truth * (k_ + 1) + k_]; }
    std::uint64_t row_total(ClassId truth) const;   // includes missed
    std::uint64_t col_total(ClassId predicted) const;
    std::uint64_t total() const;

private:
    std::size_t k_;
    std::vector<std::uint64_t> counts_;
};

struct IoUResult {
    std::vector<double> per_class;
    std::vector<bool> present;  // class has ground-truth cells
    std::optional<double> mean; // over present classes; empty when none are present
};

// IoU_k = TP / (TP + FN + FP).
IoUResult iou(const ConfusionMatrix& cm);

// Mean over the listed classes; classes without ground truth are skipped.
std::optional<double> mean_iou(const IoUResult& result, std::span<const ClassId> classes);

struct ScoredCell {
    double occupied_prob = 0.0;
    bool occupied = false;
};

// Probability that a random occupied cell outscores a random free one, ties counting half.
// Throws InvalidArgument unless both groups are non-empty.
double occupancy_auc(std::span<const ScoredCell> scored);

struct Evaluation {
    ConfusionMatrix confusion;
    IoUResult iou;
    std::optional<double> auc;
    std::size_t auc_cells = 0;
};

// Confusion over ground-truth occupied cells; AUC over all ground-truth cells that lie in an
// allocated map block.
Evaluation evaluate_map(const SemanticMap& map, const GroundTruthGrid& truth);

}  // namespace sbki
