#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace driftscope {

// Distance between items i and j under some ordering source.
using PairDistance = std::function<double(std::size_t, std::size_t)>;

// Samples n_trials triplets of distinct items (i; j, k) and counts how often
// sign(d_a(i,j) - d_a(i,k)) equals sign(d_b(i,j) - d_b(i,k)). A tie agrees only
// with a tie.
double random_triplet_accuracy(std::size_t n_items, const PairDistance& a, const PairDistance& b,
                               std::size_t n_trials, std::uint64_t seed);

// Anchored form: every item has one distance to a common anchor, so the
// comparison is between d[j] and d[k].
double random_triplet_accuracy(std::span<const double> dist_a, std::span<const double> dist_b, std::size_t n_trials,
                               std::uint64_t seed);

// Stable argsort of both arrays; fraction of positions holding the same item.
double global_permutation_accuracy(std::span<const double> dist_a, std::span<const double> dist_b);

std::vector<std::size_t> stable_argsort(std::span<const double> values);

} // namespace driftscope
