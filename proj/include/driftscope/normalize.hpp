#pragma once

#include "driftscope/dataset.hpp"

#include <span>
#include <string>
#include <vector>

namespace driftscope {

struct ColumnStats {
    std::string name;
    double mean = 0.0;
    double stddev = 1.0;
    bool pass_through = false;
    bool zero_variance = false; // continuous column left untouched because it is constant
};

// Per-column z-score statistics of a reference dataset. Standard deviations
// use the population convention (divide by N).
struct NormalizationStats {
    std::string reference;
    std::vector<ColumnStats> columns;

    void apply_inplace(std::span<double> row) const;
    void invert_inplace(std::span<double> row) const;
    std::vector<double> apply(std::span<const double> row) const;
    std::vector<double> invert(std::span<const double> row) const;
};

NormalizationStats fit_normalizer(const TabularDataset& reference, std::string reference_name = "D");
TabularDataset apply_normalizer(const NormalizationStats& stats, const TabularDataset& data);
TabularDataset invert_normalizer(const NormalizationStats& stats, const TabularDataset& data);

} // namespace driftscope
