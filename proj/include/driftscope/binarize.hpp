#pragma once

#include "driftscope/dataset.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace driftscope {

// One derived binary feature. A threshold column reads 1 when source <= threshold;
// a pass-through column copies an already-binary source column.
struct BinaryFeature {
    std::size_t source = 0;
    std::string source_name;
    bool pass_through = false;
    double threshold = 0.0;
    std::string name;
};

struct BinarizationScheme {
    std::vector<BinaryFeature> features;
    std::size_t source_cols = 0;

    std::size_t size() const noexcept { return features.size(); }
    std::vector<std::string> names() const;
    std::vector<double> apply(std::span<const double> row) const;
    TabularDataset apply(const TabularDataset& data) const;

    // Sums a vector over derived features back onto source columns.
    std::vector<double> to_source(std::span<const double> derived) const;
};

// Candidate thresholds are midpoints between consecutive sorted unique values;
// the max_thresholds_per_column candidates with the highest positive information
// gain against the label are kept (ties go to the smaller threshold), then
// emitted in increasing order.
BinarizationScheme fit_binarizer(const TabularDataset& data, std::size_t max_thresholds_per_column);

double information_gain(std::span<const double> values, std::span<const int> labels, double threshold);

} // namespace driftscope
