#include "driftscope/kernels.hpp"

#include "driftscope/error.hpp"

#include <limits>

namespace driftscope::kernels {

namespace {

void check_widths(const RowMatrix& points, const RowMatrix& centers) {
    if (centers.rows() == 0) fail(ErrorKind::EmptyPrototypeSet, "no centers to assign to");
    if (points.cols() != centers.cols()) fail(ErrorKind::DimensionMismatch, "points and centers differ in width");
}

inline void nearest_one(const RowMatrix& points, const RowMatrix& centers, Metric metric, Eigen::Index i,
                        NearestAssignment& out) {
    auto p = row_span(points, i);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_id = 0;
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
        double d = distance(p, row_span(centers, c), metric);
        if (d < best) {
            best = d;
            best_id = static_cast<std::size_t>(c);
        }
    }
    out.index[static_cast<std::size_t>(i)] = best_id;
    out.distance[static_cast<std::size_t>(i)] = best;
}

} // namespace

NearestAssignment assign_nearest_serial(const RowMatrix& points, const RowMatrix& centers, Metric metric) {
    check_widths(points, centers);
    NearestAssignment out{std::vector<std::size_t>(static_cast<std::size_t>(points.rows())),
                          std::vector<double>(static_cast<std::size_t>(points.rows()))};
    for (Eigen::Index i = 0; i < points.rows(); ++i) nearest_one(points, centers, metric, i, out);
    return out;
}

NearestAssignment assign_nearest_omp(const RowMatrix& points, const RowMatrix& centers, Metric metric) {
    check_widths(points, centers);
    NearestAssignment out{std::vector<std::size_t>(static_cast<std::size_t>(points.rows())),
                          std::vector<double>(static_cast<std::size_t>(points.rows()))};
    omp_for(points.rows(), [&](std::ptrdiff_t i) { nearest_one(points, centers, metric, i, out); });
    return out;
}

NearestAssignment assign_nearest(const RowMatrix& points, const RowMatrix& centers, Metric metric, Exec exec) {
    return resolve(exec) == Exec::omp ? assign_nearest_omp(points, centers, metric)
                                      : assign_nearest_serial(points, centers, metric);
}

std::vector<double> distances_to_serial(const RowMatrix& points, std::span<const double> anchor, Metric metric) {
    std::vector<double> out(static_cast<std::size_t>(points.rows()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        out[static_cast<std::size_t>(i)] = distance(row_span(points, i), anchor, metric);
    }
    return out;
}

std::vector<double> distances_to_omp(const RowMatrix& points, std::span<const double> anchor, Metric metric) {
    std::vector<double> out(static_cast<std::size_t>(points.rows()));
    omp_for(points.rows(), [&](std::ptrdiff_t i) {
        out[static_cast<std::size_t>(i)] = distance(row_span(points, i), anchor, metric);
    });
    return out;
}

std::vector<double> distances_to(const RowMatrix& points, std::span<const double> anchor, Metric metric, Exec exec) {
    return resolve(exec) == Exec::omp ? distances_to_omp(points, anchor, metric)
                                      : distances_to_serial(points, anchor, metric);
}

} // namespace driftscope::kernels
