#include "driftscope/neighbourhood.hpp"

#include "driftscope/error.hpp"
#include "driftscope/kernels.hpp"
#include "driftscope/stats.hpp"

#include <fmt/format.h>

namespace driftscope {

namespace {

RowMatrix sample_matrix(const TabularDataset& data, bool label_aware) {
    return label_aware ? with_label_slots(data) : data.features();
}

struct SideTally {
    std::vector<std::size_t> count;
    std::vector<double> dist_sum;
};

SideTally tally(const kernels::NearestAssignment& a, std::size_t k) {
    SideTally t{std::vector<std::size_t>(k, 0), std::vector<double>(k, 0.0)};
    for (std::size_t i = 0; i < a.index.size(); ++i) {
        ++t.count[a.index[i]];
        t.dist_sum[a.index[i]] += a.distance[i];
    }
    return t;
}

} // namespace

NeighbourhoodStats neighbourhood_stats(const std::vector<Prototype>& prototypes, const TabularDataset& d,
                                       const TabularDataset& d_prime, const NeighbourhoodOptions& options) {
    if (prototypes.empty()) fail(ErrorKind::EmptyPrototypeSet, "no prototypes to compare against");
    if (d.empty() || d_prime.empty()) fail(ErrorKind::EmptyDataset, "both datasets need at least one row");
    if (d.cols() != d_prime.cols()) fail(ErrorKind::SchemaMismatch, "datasets differ in width");
    const RowMatrix centers = prototype_matrix(prototypes, options.label_aware);
    auto a = kernels::assign_nearest(sample_matrix(d, options.label_aware), centers, options.metric, options.exec);
    auto b = kernels::assign_nearest(sample_matrix(d_prime, options.label_aware), centers, options.metric, options.exec);

    const std::size_t k = prototypes.size();
    auto ta = tally(a, k);
    auto tb = tally(b, k);
    NeighbourhoodStats out;
    out.options = options;
    out.prototypes.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        auto& p = out.prototypes[i];
        p.prototype_id = prototypes[i].id;
        p.count_d = ta.count[i];
        p.count_dp = tb.count[i];
        p.proportion_d = static_cast<double>(p.count_d) / static_cast<double>(d.rows());
        p.proportion_dp = static_cast<double>(p.count_dp) / static_cast<double>(d_prime.rows());
        p.nspd = p.proportion_d - p.proportion_dp;
        if (p.count_d > 0) p.mean_distance_d = ta.dist_sum[i] / static_cast<double>(p.count_d);
        if (p.count_dp > 0) p.mean_distance_dp = tb.dist_sum[i] / static_cast<double>(p.count_dp);
        if (p.mean_distance_d && p.mean_distance_dp) p.nsdd = *p.mean_distance_d - *p.mean_distance_dp;
    }
    out.assignment_d = std::move(a.index);
    out.assignment_dp = std::move(b.index);
    return out;
}

std::vector<double> prototype_distances(const Prototype& prototype, const TabularDataset& data,
                                        const NeighbourhoodOptions& options) {
    if (prototype.features.size() != data.cols()) {
        fail(ErrorKind::DimensionMismatch,
             fmt::format("prototype has {} features, data {}", prototype.features.size(), data.cols()));
    }
    const RowMatrix anchor = prototype_matrix({prototype}, options.label_aware);
    return kernels::distances_to(sample_matrix(data, options.label_aware), kernels::row_span(anchor, 0), options.metric,
                                 options.exec);
}

double resolve_delta(const Prototype& prototype, const TabularDataset& data, Delta delta,
                     const NeighbourhoodOptions& options) {
    if (!delta.is_percentile) {
        if (delta.value < 0.0) fail(ErrorKind::InvalidArgument, "delta must be non-negative");
        return delta.value;
    }
    if (!(delta.value > 0.0 && delta.value <= 100.0)) {
        fail(ErrorKind::InvalidArgument, fmt::format("delta percentile {} is outside (0, 100]", delta.value));
    }
    if (data.empty()) fail(ErrorKind::EmptyDataset, "percentile of an empty distance set");
    return stats::percentile(prototype_distances(prototype, data, options), delta.value);
}

std::vector<std::size_t> rows_within(const std::vector<double>& distances, double radius) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < distances.size(); ++i) {
        if (distances[i] <= radius) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> delta_neighbourhood(const Prototype& prototype, const TabularDataset& data, Delta delta,
                                             const NeighbourhoodOptions& options) {
    if (data.empty()) return {};
    if (delta.is_percentile ? !(delta.value > 0.0 && delta.value <= 100.0) : delta.value < 0.0) {
        fail(ErrorKind::InvalidArgument, fmt::format("invalid delta {}", delta.value));
    }
    auto dist = prototype_distances(prototype, data, options);
    return rows_within(dist, delta.is_percentile ? stats::percentile(dist, delta.value) : delta.value);
}

} // namespace driftscope
