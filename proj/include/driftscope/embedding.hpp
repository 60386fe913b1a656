#pragma once

#include "driftscope/dataset.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace driftscope {

// 2-D coordinates for plotting, one row per input row.
struct Embedding {
    std::string method;     // "pca" or "precomputed"
    std::string note;
    RowMatrix coords;       // n x 2
    std::vector<double> explained_variance;   // pca only: share per component
};

// Linear projection onto the two leading principal components. Each axis is
// oriented so its largest-magnitude loading is positive. This is a fallback
// and does not preserve local structure the way PaCMAP-style methods do.
Embedding pca_embedding(const RowMatrix& x);

// A CSV with columns x and y (other columns ignored) holding expected_rows rows.
Embedding load_embedding(const std::filesystem::path& path, std::size_t expected_rows);

} // namespace driftscope
