#include "driftscope/distance.hpp"

#include "driftscope/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace driftscope {

Metric parse_metric(std::string_view name) {
    if (name == "euclidean") return Metric::euclidean;
    if (name == "cosine") return Metric::cosine;
    fail(ErrorKind::InvalidArgument, fmt::format("unknown metric '{}'", name));
}

std::string_view to_string(Metric metric) {
    return metric == Metric::euclidean ? "euclidean" : "cosine";
}

double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
    if (a.size() != b.size()) {
        fail(ErrorKind::DimensionMismatch, fmt::format("vectors of length {} and {}", a.size(), b.size()));
    }
    if (metric == Metric::euclidean) {
        double ss = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            double d = a[i] - b[i];
            ss += d * d;
        }
        return std::sqrt(ss);
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 && nb == 0.0) fail(ErrorKind::ZeroVector, "cosine distance between two zero vectors");
    if (na == 0.0 || nb == 0.0) return 1.0;
    double sim = dot / (std::sqrt(na) * std::sqrt(nb));
    // Rounding can push |sim| a hair past 1.
    return std::max(0.0, 1.0 - std::clamp(sim, -1.0, 1.0));
}

} // namespace driftscope
