#pragma once

#include "driftscope/dataset.hpp"

#include <cstdint>
#include <vector>

namespace driftscope {

enum class ProportionMode { equal, dirichlet };

struct MixturePairSpec {
    std::size_t k = 6;
    double radius = 10.0;
    std::size_t per_cluster = 60;  // used by ProportionMode::equal
    std::size_t total = 360;       // used by ProportionMode::dirichlet
    double std = 1.0;              // isotropic standard deviation of every cluster
    ProportionMode proportions = ProportionMode::equal;
    double alpha = 1.0;            // symmetric Dirichlet concentration
    std::uint64_t seed = 0;
};

// The two circle-mixture setups: case 1 pairs two equal-proportion mixtures
// (radius 10 and 20), case 2 gives the outer mixture Dirichlet proportions.
std::pair<MixturePairSpec, MixturePairSpec> circle_case(int which, std::uint64_t seed);

struct MixtureSample {
    TabularDataset data;
    RowMatrix centers;                 // k x 2, on the circle
    std::vector<double> proportions;   // mixing weights the points were drawn with
    std::vector<std::size_t> cluster;  // source cluster of every row
};

struct MixturePair {
    std::vector<double> angles; // shared, ascending, so cluster i of X pairs with cluster i of Y
    MixtureSample x;
    MixtureSample y;
};

// Center angles are drawn uniformly once (from spec_x's seed) and shared. Each
// side draws its points from its own seed.
MixturePair gen_circle_mixture_pair(const MixturePairSpec& spec_x, const MixturePairSpec& spec_y);

// Labelled tabular pair used by the prototype sweeps: eight features of mixed
// shape (Gaussian, bimodal, binary, uniform, heavy-noise) with a label driven by
// three of them. D' has a mean shift on two features and a different prevalence.
struct TabularPair {
    TabularDataset d;
    TabularDataset d_prime;
};
TabularPair synthetic_corpus(std::uint64_t seed, std::size_t n = 400);

// D' is a copy of D's distribution plus `planted_fraction` extra rows with a
// distinct importance signature: a flag feature that is 0 everywhere else and
// fully determines their label. planted[i] marks planted rows of D'.
struct PlantedShift {
    TabularDataset d;
    TabularDataset d_prime;
    std::vector<char> planted;
};
PlantedShift planted_shift(std::uint64_t seed, std::size_t n = 400, double planted_fraction = 0.05);

// Two-class rows with per-row random substreams, so the first n rows do not
// depend on how many rows are drawn. With identical set, every row is the same.
struct LogisticSample {
    RowMatrix x;
    std::vector<int> y;
};
LogisticSample logistic_sample(std::size_t n, std::size_t m, std::uint64_t seed, bool identical = false);

} // namespace driftscope
