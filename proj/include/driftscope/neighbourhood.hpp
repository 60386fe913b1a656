#pragma once

#include "driftscope/dataset.hpp"
#include "driftscope/distance.hpp"
#include "driftscope/parallel.hpp"
#include "driftscope/prototypes.hpp"

#include <optional>
#include <vector>

namespace driftscope {

struct NeighbourhoodOptions {
    Metric metric = Metric::euclidean;
    // Append one-hot labels to samples and prototypes before measuring distance.
    bool label_aware = false;
    Exec exec = Exec::automatic;
};

struct PrototypeNeighbours {
    std::size_t prototype_id = 0;
    std::size_t count_d = 0;
    std::size_t count_dp = 0;
    double proportion_d = 0.0;
    double proportion_dp = 0.0;
    std::optional<double> mean_distance_d;  // empty when no sample of D is a neighbour
    std::optional<double> mean_distance_dp;
    double nspd = 0.0;
    std::optional<double> nsdd;             // empty when either side has no neighbours
};

struct NeighbourhoodStats {
    NeighbourhoodOptions options;
    std::vector<PrototypeNeighbours> prototypes;
    std::vector<std::size_t> assignment_d;  // nearest prototype (vector position) per row of D
    std::vector<std::size_t> assignment_dp;
};

// Assigns every sample of both datasets to its nearest prototype (ties to the
// lowest id) and tabulates neighbour proportions and mean distances per prototype.
NeighbourhoodStats neighbourhood_stats(const std::vector<Prototype>& prototypes, const TabularDataset& d,
                                       const TabularDataset& d_prime, const NeighbourhoodOptions& options = {});

// Neighbourhood radius, either absolute or as a percentile of the distances
// from the prototype to the rows of some dataset.
struct Delta {
    double value = 10.0;
    bool is_percentile = true;

    static Delta radius(double r) { return {r, false}; }
    static Delta percentile(double p) { return {p, true}; }
};

// Distance from the prototype to every row of data (label slots appended when
// label_aware is set).
std::vector<double> prototype_distances(const Prototype& prototype, const TabularDataset& data,
                                        const NeighbourhoodOptions& options = {});

double resolve_delta(const Prototype& prototype, const TabularDataset& data, Delta delta,
                     const NeighbourhoodOptions& options = {});

// Rows of data within distance delta of the prototype (inclusive), in row order.
// A percentile delta is taken over the distances to data itself.
std::vector<std::size_t> delta_neighbourhood(const Prototype& prototype, const TabularDataset& data, Delta delta,
                                             const NeighbourhoodOptions& options = {});
std::vector<std::size_t> rows_within(const std::vector<double>& distances, double radius);

} // namespace driftscope
