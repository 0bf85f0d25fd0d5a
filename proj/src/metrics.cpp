#include "sbki/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace sbki {

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes)
    : k_(num_classes), counts_(num_classes * (num_classes + 1), 0) {
    if (num_classes < 2) throw InvalidArgument("confusion matrix needs K >= 2");
}

void ConfusionMatrix::add(ClassId truth, ClassId predicted, std::uint64_t n) {
    if (truth >= k_ || predicted >= k_) throw InvalidArgument("class id out of range");
    counts_[truth * (k_ + 1) + predicted] += n;
}

void ConfusionMatrix::add_missed(ClassId truth, std::uint64_t n) {
    if (truth >= k_) throw InvalidArgument("class id out of range");
    counts_[truth * (k_ + 1) + k_] += n;
}

std::uint64_t ConfusionMatrix::row_total(ClassId truth) const {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j <= k_; ++j) s += counts_[truth * (k_ + 1) + j];
    return s;
}

std::uint64_t ConfusionMatrix::col_total(ClassId predicted) const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < k_; ++i) s += counts_[i * (k_ + 1) + predicted];
    return s;
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t s = 0;
    for (auto c : counts_) s += c;
    return s;
}

IoUResult iou(const ConfusionMatrix& cm) {
    const std::size_t k = cm.num_classes();
    IoUResult r;
    r.per_class.assign(k, 0.0);
    r.present.assign(k, false);
    double sum = 0.0;
    std::size_t n = 0;
    for (ClassId c = 0; c < k; ++c) {
        const std::uint64_t tp = cm.at(c, c);
        const std::uint64_t row = cm.row_total(c);
        const std::uint64_t col = cm.col_total(c);
        const std::uint64_t denom = row + col - tp;
        r.per_class[c] = denom == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(denom);
        r.present[c] = row > 0;
        if (r.present[c]) {
            sum += r.per_class[c];
            ++n;
        }
    }
    if (n > 0) r.mean = sum / static_cast<double>(n);
    return r;
}

std::optional<double> mean_iou(const IoUResult& result, std::span<const ClassId> classes) {
    double sum = 0.0;
    std::size_t n = 0;
    for (ClassId c : classes) {
        if (c < result.present.size() && result.present[c]) {
            sum += result.per_class[c];
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

double occupancy_auc(std::span<const ScoredCell> scored) {
    std::vector<ScoredCell> sorted(scored.begin(), scored.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const ScoredCell& a, const ScoredCell& b) { return a.occupied_prob < b.occupied_prob; });

    // Mann-Whitney U with mid-ranks, kept in doubled integer units so it is exact.
    std::uint64_t positives = 0, negatives = 0;
    std::uint64_t doubled_rank_sum = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].occupied_prob == sorted[i].occupied_prob) ++j;
        // Ranks i+1 .. j share the mid-rank (i + 1 + j) / 2.
        const std::uint64_t doubled_mid = static_cast<std::uint64_t>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) {
            if (sorted[t].occupied) {
                ++positives;
                doubled_rank_sum += doubled_mid;
            } else {
                ++negatives;
            }
        }
        i = j;
    }
    if (positives == 0 || negatives == 0) {
        throw InvalidArgument("AUC needs at least one occupied and one free cell");
    }
    const std::uint64_t doubled_u = doubled_rank_sum - positives * (positives + 1);
    return static_cast<double>(doubled_u) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

Evaluation evaluate_map(const SemanticMap& map, const GroundTruthGrid& truth) {
    const double res = map.config().resolution;
    if (std::abs(res - truth.resolution()) > 1e-9 * std::max(1.0, res)) {
        throw InvalidArgument("map resolution " + std::to_string(res) +
                              " does not match ground truth resolution " +
                              std::to_string(truth.resolution()));
    }
    const std::size_t k = map.config().num_classes;
    Evaluation ev{ConfusionMatrix(k), {}, std::nullopt, 0};
    const GridGeometry g = map.geometry();

    std::vector<ScoredCell> scored;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const ClassId gt = truth.label(i);
        if (gt >= k) throw InvalidArgument("ground-truth label exceeds map class count");
        const VoxelIndex v = truth.voxel(i);
        const CellGrid* grid = map.find_block(block_of_voxel(v, g.depth));
        std::optional<CellStats> stats;
        if (grid) stats = cell_stats(grid->alpha(grid->cell_index_of(v)), map.config());

        if (gt != kFreeClass) {
            if (!stats || stats->state == CellState::Unknown) {
                ev.confusion.add_missed(gt);
            } else {
                ev.confusion.add(gt, stats->argmax_class);
            }
        }
        if (stats) scored.push_back(ScoredCell{stats->occupied_prob, gt != kFreeClass});
    }
    ev.iou = iou(ev.confusion);
    ev.auc_cells = scored.size();
    const bool has_pos = std::any_of(scored.begin(), scored.end(), [](const auto& s) { return s.occupied; });
    const bool has_neg = std::any_of(scored.begin(), scored.end(), [](const auto& s) { return !s.occupied; });
    if (has_pos && has_neg) ev.auc = occupancy_auc(scored);
    return ev;
}

}  // namespace sbki
