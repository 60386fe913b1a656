#pragma once

#include "driftscope/dataset.hpp"
#include "driftscope/parallel.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace driftscope {

enum class Provenance { kmeans, percentile_grid, manual };
std::string_view to_string(Provenance p);

// A representative point in the normalized feature space of the datasets it is
// compared against.
struct Prototype {
    std::size_t id = 0;
    std::vector<double> features;
    std::optional<int> label;
    Provenance provenance = Provenance::manual;
};

// Lloyd iterations from a seeded k-means++ start. Empty clusters keep their
// previous center. Stops when no assignment changes or after max_iter rounds.
std::vector<Prototype> kmeans_prototypes(const TabularDataset& data, std::size_t k, std::uint64_t seed,
                                         std::size_t max_iter = 300, Exec exec = Exec::automatic);

// Cartesian grid over the given percentiles of two columns. Every other column is
// set to its median. The label of each grid point is the prediction of a greedy
// tree of depth label_tree_depth fit on the two columns (binarized by
// information gain) against data's labels.
std::vector<Prototype> percentile_grid_prototypes(const TabularDataset& data, const std::array<std::string, 2>& columns,
                                                  const std::vector<double>& percentiles = {10.0, 50.0, 90.0},
                                                  int label_tree_depth = 2);

std::vector<Prototype> manual_prototypes(const RowMatrix& points, const std::optional<std::vector<int>>& labels = std::nullopt);

// Prototype vectors as matrix rows, with one-hot label slots (class 0, class 1)
// appended when label_aware is set.
RowMatrix prototype_matrix(const std::vector<Prototype>& prototypes, bool label_aware = false);

// Rows of data with one-hot label slots appended.
RowMatrix with_label_slots(const TabularDataset& data);

} // namespace driftscope
