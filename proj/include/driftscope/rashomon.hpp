#pragma once

#include "driftscope/binarize.hpp"
#include "driftscope/dataset.hpp"
#include "driftscope/parallel.hpp"
#include "driftscope/shapley.hpp"
#include "driftscope/tree.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace driftscope {

enum class ImportanceKind { lfim, lifim, gifim };
std::string_view to_string(ImportanceKind kind);

struct ImportanceVector {
    std::vector<double> values;
    ImportanceKind kind = ImportanceKind::lifim;
    std::string subject; // example or dataset the attribution belongs to
    std::vector<std::string> feature_names;
};

struct EnsembleConfig {
    std::size_t bootstraps = 10;
    double epsilon = 0.01;
    int depth = 3;
    double lambda = 0.01;
    std::size_t candidates_per_bootstrap = 8;
    // Candidate 0 of every bootstrap sees all features; the others split on
    // seeded random subsets of this share of the available features.
    double feature_subsample = 0.6;
    std::uint64_t seed = 0;
};

struct BootstrapReplicate {
    std::vector<std::size_t> sample;        // row ids drawn with replacement
    double best_loss = 0.0;                 // lowest regularized loss among candidates
    std::vector<DecisionTree> members;      // candidates within epsilon of best_loss
    std::vector<double> member_losses;
    std::size_t candidates_fit = 0;
};

// Bootstrap replicates, each holding the near-optimal trees found by a
// diversified greedy search. This approximates exact Rashomon-set enumeration:
// a member is within epsilon of the best candidate found, not of the true
// optimum over all depth-limited trees.
struct RashomonEnsemble {
    EnsembleConfig config;
    std::size_t n_features = 0;
    std::vector<std::string> feature_names;
    std::vector<BootstrapReplicate> bootstraps;

    std::size_t member_count() const;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// Draws the bootstrap sample of replicate b (N rows uniformly with replacement).
std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed, std::size_t replicate);

RashomonEnsemble build_ensemble(const TabularDataset& binarized, const EnsembleConfig& config,
                                Exec exec = Exec::automatic);

// Seeded sample of min(N, max_rows) rows of data (kept in row order).
RowMatrix select_background(const TabularDataset& data, std::size_t max_rows, std::uint64_t seed);

// Shapley attribution of one tree at x (interventional, class-1 probability).
ImportanceVector lfim_tree_shapley(const DecisionTree& tree, std::span<const double> x, const Background& background,
                                   ShapleyAlgorithm algorithm = ShapleyAlgorithm::automatic);

// Mean of member attributions within each replicate, then mean over replicates.
// A tree present in several replicates contributes once per appearance.
std::vector<double> lifim(const RashomonEnsemble& ensemble, std::span<const double> x, const Background& background,
                          ShapleyAlgorithm algorithm = ShapleyAlgorithm::automatic);

// One LiFIM row per input row. Identical rows are attributed once.
RowMatrix lifim_batch_serial(const RashomonEnsemble& ensemble, const RowMatrix& rows, const Background& background,
                             ShapleyAlgorithm algorithm = ShapleyAlgorithm::automatic);
RowMatrix lifim_batch_omp(const RashomonEnsemble& ensemble, const RowMatrix& rows, const Background& background,
                          ShapleyAlgorithm algorithm = ShapleyAlgorithm::automatic);
RowMatrix lifim_batch(const RashomonEnsemble& ensemble, const RowMatrix& rows, const Background& background,
                      ShapleyAlgorithm algorithm = ShapleyAlgorithm::automatic, Exec exec = Exec::automatic);

// Mean of the row LiFIMs of data.
ImportanceVector gifim(const RashomonEnsemble& ensemble, const TabularDataset& binarized, const Background& background,
                       std::string subject = "D", ShapleyAlgorithm algorithm = ShapleyAlgorithm::automatic,
                       Exec exec = Exec::automatic);
std::vector<double> column_mean(const RowMatrix& m);

// Everything needed to attribute raw rows of one dataset: the shared
// binarization, the dataset's ensemble and its background sample.
struct IntrinsicImportance {
    BinarizationScheme scheme;
    RashomonEnsemble ensemble;
    Background background;
    ShapleyAlgorithm algorithm = ShapleyAlgorithm::automatic;

    // The background is sampled from reference when given (raw rows, binarized
    // with the same scheme), otherwise from raw itself.
    static IntrinsicImportance fit(const TabularDataset& raw, const BinarizationScheme& scheme,
                                   const EnsembleConfig& config, std::size_t background_rows = 128,
                                   Exec exec = Exec::automatic, const TabularDataset* reference = nullptr);

    // LiFIM over the binarized features.
    std::vector<double> local(std::span<const double> raw_row) const;
    // LiFIM summed back onto the source columns.
    std::vector<double> local_source(std::span<const double> raw_row) const;
    RowMatrix batch(const TabularDataset& raw, Exec exec = Exec::automatic) const;
    // batch() with every row summed back onto the source columns.
    RowMatrix batch_source(const TabularDataset& raw, Exec exec = Exec::automatic) const;
};

} // namespace driftscope
