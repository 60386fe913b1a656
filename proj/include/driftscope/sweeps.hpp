#pragma once

#include "driftscope/dataset.hpp"
#include "driftscope/influence.hpp"
#include "driftscope/parallel.hpp"
#include "driftscope/partial.hpp"
#include "driftscope/rashomon.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace driftscope {

// Ranks a row of either dataset with the matching ensemble, summed onto the
// source columns. The returned provider keeps both models alive.
LifimProvider make_lifim_provider(std::shared_ptr<const IntrinsicImportance> d,
                                  std::shared_ptr<const IntrinsicImportance> d_prime);

// Normalized datasets, prototypes and their selection inputs. The scorings
// carry importance ranks only when a provider was available.
struct PrototypeContext {
    TabularDataset d;
    TabularDataset d_prime;
    std::vector<Prototype> prototypes;
    PartialOptions options;
    std::vector<PrototypeScoring> scorings;
};

PrototypeContext make_prototype_context(TabularDataset d, TabularDataset d_prime, std::vector<Prototype> prototypes,
                                        const PartialOptions& options, const LifimProvider* provider);

struct CorpusContextOptions {
    std::size_t rows = 400;
    std::size_t prototypes = 6;
    bool with_importance = true;
    EnsembleConfig ensemble;
    std::size_t thresholds_per_column = 8;
    std::size_t background_rows = 128;
};

// The synthetic corpus normalized by D, k-means prototypes on D and, when
// requested, intrinsic importance for both sides.
PrototypeContext corpus_context(std::uint64_t seed, const CorpusContextOptions& options = {}, Exec exec = Exec::automatic);

struct FaithfulnessOptions {
    std::vector<std::size_t> ks;      // empty: 1..M
    ScoreWeights weights{0.0, 0.0, 1.0};
    std::size_t random_seeds = 10;
    std::size_t n_trials = 1000;
    std::uint64_t seed = 0;
    Exec exec = Exec::automatic;
};

struct FaithfulnessRecord {
    std::size_t k = 0;
    std::string selection;   // "scored" or "random"
    double rta = 0.0;
    double gpa = 0.0;
    double variance = 0.0;   // mean neighbourhood variance of the selected features
    std::size_t prototypes = 0;
    std::size_t seeds = 0;
};

struct FaithfulnessSweep {
    FaithfulnessOptions options;
    std::vector<FaithfulnessRecord> records; // per K: scored, then random
};

// Orders each prototype's neighbourhood (its delta-neighbours in D and D') by
// distance over all features and over the selected ones, and compares the two
// orderings. Prototypes with fewer than three neighbours are skipped.
FaithfulnessSweep faithfulness_sweep(const PrototypeContext& context, const FaithfulnessOptions& options = {});

struct TradeoffOptions {
    std::size_t n_samples = 200;
    double c_low = 1e-2;
    double c_high = 10.0;
    std::vector<std::size_t> ks{3, 4, 5};
    std::uint64_t seed = 0;
    Exec exec = Exec::automatic;
};

struct TradeoffRecord {
    std::size_t sample = 0;
    ScoreWeights weights;
    std::size_t k = 0;
    double rank_difference = 0.0;
    double absolute_rank = 0.0;
    double value_deviation = 0.0;
};

struct TradeoffSweep {
    TradeoffOptions options;
    std::vector<TradeoffRecord> records; // sample-major, then K
};

// (c1, c2, c3) drawn log-uniformly from [c_low, c_high]; metrics are means over
// the selected features and over prototypes. Needs importance ranks.
TradeoffSweep tradeoff_sweep(const PrototypeContext& context, const TradeoffOptions& options = {});

// Pearson correlation of absolute rank against rank difference over the records
// with the given K (all records when k is empty).
std::optional<double> tradeoff_correlation(const TradeoffSweep& sweep, std::optional<std::size_t> k = std::nullopt);

struct AlignmentPoint {
    double fraction = 0.0;
    std::size_t removed = 0;
    std::optional<double> alignment;
    std::size_t planted_removed = 0;
};

struct AlignmentSweep {
    std::vector<double> scores_dp;
    double discriminator_accuracy = 0.0;
    std::vector<AlignmentPoint> points;
};

std::vector<double> default_removal_fractions();

// Removes the top fraction of D' by influence (at least one row, at most N' - 1)
// and refits the D' ensemble on the remainder for every fraction. planted, when
// given, counts how many removed rows are marked.
AlignmentSweep alignment_sweep(const TabularDataset& d, const TabularDataset& d_prime, const BinarizationScheme& scheme,
                               const InfluenceOptions& options, const std::vector<double>& fractions,
                               const std::vector<char>* planted = nullptr);

struct InfluenceValidation {
    std::size_t n = 0;
    std::size_t m = 0;
    double l2 = 0.0;
    std::uint64_t seed = 0;
    bool identical_rows = false;
    std::vector<double> scores;
    std::vector<double> oracle;
    std::optional<double> pearson; // empty when either side has zero variance
    double sign_agreement = 0.0;
    bool degenerate = false;
};

// Seeded two-class task with a held-out test set of the same size; compares
// influence scores with leave-one-out refits.
InfluenceValidation validate_influence(std::size_t n, std::size_t m, double l2, std::uint64_t seed,
                                       bool identical_rows = false, Exec exec = Exec::automatic);

} // namespace driftscope
