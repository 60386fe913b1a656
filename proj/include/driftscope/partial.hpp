#pragma once

#include "driftscope/dataset.hpp"
#include "driftscope/neighbourhood.hpp"
#include "driftscope/prototypes.hpp"

#include <functional>
#include <span>
#include <vector>

namespace driftscope {

struct ScoreWeights {
    double c1 = 1.0; // rank difference
    double c2 = 1.0; // absolute rank
    double c3 = 1.0; // value difference
};

// 1-based rank of |importance| (rank 1 = largest magnitude, ties by lower index).
std::vector<double> importance_ranks(std::span<const double> importance);

// Score of feature j for a prototype and one neighbour; lower is better.
// Values are compared in the normalized space.
double feature_score(std::size_t j, std::span<const double> x_p, std::span<const double> x_n,
                     std::span<const double> importance_p, std::span<const double> importance_n, const ScoreWeights& c);
double feature_score_ranked(std::size_t j, std::span<const double> x_p, std::span<const double> x_n,
                            std::span<const double> ranks_p, std::span<const double> ranks_n, const ScoreWeights& c);

enum class Side { d, d_prime };

// Local intrinsic importance of a (normalized) row under the ensemble of the
// given dataset. Must return one value per source column.
using LifimProvider = std::function<std::vector<double>(std::span<const double> row, Side side)>;

struct PartialOptions {
    std::size_t k = 3;
    ScoreWeights weights;
    Delta delta = Delta::percentile(10.0);
    // A percentile delta is resolved over D's distances unless this is set, in
    // which case each side uses the distances to its own rows.
    bool delta_per_side = false;
    NeighbourhoodOptions neighbourhood;
};

// Everything the selection needs for one prototype, independent of (c1, c2, c3)
// and K, so sweeps can re-score without touching the importance provider.
struct PrototypeScoring {
    Prototype prototype;
    double radius_d = 0.0;
    double radius_dp = 0.0;
    std::vector<std::size_t> rows_d;  // delta-neighbours in D
    std::vector<std::size_t> rows_dp; // delta-neighbours in D'
    bool has_ranks = false;
    std::vector<double> prototype_ranks;
    RowMatrix diff_d, diff_dp;   // |x_p[j] - x[j]| per neighbour and feature
    RowMatrix ranks_d, ranks_dp; // neighbour importance ranks (empty without ranks)

    std::size_t width() const noexcept { return prototype.features.size(); }

    // s_total per feature: mean neighbour score in D plus mean in D'. An empty
    // side contributes zero.
    std::vector<double> scores(const ScoreWeights& c) const;

    // Per-feature neighbourhood means of |U_p - U_n|, (U_p + U_n) / 2 and
    // |x_p - x_n|, averaged over the non-empty sides.
    struct Components {
        std::vector<double> rank_difference;
        std::vector<double> absolute_rank;
        std::vector<double> value_deviation;
    };
    Components components() const;
};

PrototypeScoring prepare_scoring(const Prototype& prototype, const TabularDataset& d, const TabularDataset& d_prime,
                                 const PartialOptions& options, const LifimProvider* provider);

// Indices of the k lowest scores, ordered by ascending score then index.
std::vector<std::size_t> lowest_k(const std::vector<double>& scores, std::size_t k);

struct PartialPrototype {
    std::size_t parent = 0;
    std::vector<std::size_t> indices; // ascending score, ties by index
    std::vector<double> values;       // prototype values at indices
    std::vector<double> scores;       // s_total for every feature
    std::size_t neighbours_d = 0;
    std::size_t neighbours_dp = 0;
    bool empty_d = false;
    bool empty_dp = false;
};

PartialPrototype select_partial(const PrototypeScoring& scoring, std::size_t k, const ScoreWeights& c);

// Partial prototypes for every prototype. provider may be null when c1 = c2 = 0.
std::vector<PartialPrototype> partial_prototypes(const std::vector<Prototype>& prototypes, const TabularDataset& d,
                                                 const TabularDataset& d_prime, const PartialOptions& options,
                                                 const LifimProvider* provider);

} // namespace driftscope
