#pragma once

#include "driftscope/dataset.hpp"
#include "driftscope/distance.hpp"
#include "driftscope/parallel.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace driftscope::kernels {

struct NearestAssignment {
    std::vector<std::size_t> index;  // nearest center per point, ties to the lowest center id
    std::vector<double> distance;    // distance to that center
};

NearestAssignment assign_nearest_serial(const RowMatrix& points, const RowMatrix& centers, Metric metric);
NearestAssignment assign_nearest_omp(const RowMatrix& points, const RowMatrix& centers, Metric metric);
NearestAssignment assign_nearest(const RowMatrix& points, const RowMatrix& centers, Metric metric,
                                 Exec exec = Exec::automatic);

std::vector<double> distances_to_serial(const RowMatrix& points, std::span<const double> anchor, Metric metric);
std::vector<double> distances_to_omp(const RowMatrix& points, std::span<const double> anchor, Metric metric);
std::vector<double> distances_to(const RowMatrix& points, std::span<const double> anchor, Metric metric,
                                 Exec exec = Exec::automatic);

inline std::span<const double> row_span(const RowMatrix& m, Eigen::Index i) {
    return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

} // namespace driftscope::kernels
