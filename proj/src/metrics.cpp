#include "driftscope/metrics.hpp"

#include "driftscope/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <random>

namespace driftscope {

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

} // namespace

double random_triplet_accuracy(std::size_t n_items, const PairDistance& a, const PairDistance& b,
                               std::size_t n_trials, std::uint64_t seed) {
    if (n_items < 3) fail(ErrorKind::TooFewItems, fmt::format("triplets need at least 3 items, got {}", n_items));
    if (n_trials == 0) fail(ErrorKind::InvalidArgument, "n_trials must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n_items - 1);
    std::size_t agree = 0;
    for (std::size_t t = 0; t < n_trials; ++t) {
        std::size_t i = pick(rng), j = pick(rng), k = pick(rng);
        while (j == i) j = pick(rng);
        while (k == i || k == j) k = pick(rng);
        agree += sign(a(i, j) - a(i, k)) == sign(b(i, j) - b(i, k));
    }
    return static_cast<double>(agree) / static_cast<double>(n_trials);
}

double random_triplet_accuracy(std::span<const double> dist_a, std::span<const double> dist_b, std::size_t n_trials,
                               std::uint64_t seed) {
    if (dist_a.size() != dist_b.size()) fail(ErrorKind::LengthMismatch, "distance arrays differ in length");
    return random_triplet_accuracy(
        dist_a.size(), [&](std::size_t, std::size_t j) { return dist_a[j]; },
        [&](std::size_t, std::size_t j) { return dist_b[j]; }, n_trials, seed);
}

std::vector<std::size_t> stable_argsort(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
    return order;
}

double global_permutation_accuracy(std::span<const double> dist_a, std::span<const double> dist_b) {
    if (dist_a.size() != dist_b.size()) fail(ErrorKind::LengthMismatch, "distance arrays differ in length");
    if (dist_a.empty()) fail(ErrorKind::LengthMismatch, "distance arrays are empty");
    auto oa = stable_argsort(dist_a), ob = stable_argsort(dist_b);
    std::size_t same = 0;
    for (std::size_t i = 0; i < oa.size(); ++i) same += oa[i] == ob[i];
    return static_cast<double>(same) / static_cast<double>(oa.size());
}

} // namespace driftscope
