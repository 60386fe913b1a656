#include "driftscope/normalize.hpp"

#include "driftscope/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace driftscope {

void NormalizationStats::apply_inplace(std::span<double> row) const {
    if (row.size() != columns.size()) fail(ErrorKind::SchemaMismatch, "row width differs from normalizer");
    for (std::size_t j = 0; j < row.size(); ++j) {
        const auto& c = columns[j];
        if (!c.pass_through) row[j] = (row[j] - c.mean) / c.stddev;
    }
}

void NormalizationStats::invert_inplace(std::span<double> row) const {
    if (row.size() != columns.size()) fail(ErrorKind::SchemaMismatch, "row width differs from normalizer");
    for (std::size_t j = 0; j < row.size(); ++j) {
        const auto& c = columns[j];
        if (!c.pass_through) row[j] = row[j] * c.stddev + c.mean;
    }
}

std::vector<double> NormalizationStats::apply(std::span<const double> row) const {
    std::vector<double> out(row.begin(), row.end());
    apply_inplace(out);
    return out;
}

std::vector<double> NormalizationStats::invert(std::span<const double> row) const {
    std::vector<double> out(row.begin(), row.end());
    invert_inplace(out);
    return out;
}

NormalizationStats fit_normalizer(const TabularDataset& reference, std::string reference_name) {
    if (reference.rows() < 2) {
        fail(ErrorKind::EmptyDataset, fmt::format("normalizer needs at least 2 rows, got {}", reference.rows()));
    }
    NormalizationStats stats;
    stats.reference = std::move(reference_name);
    const auto n = static_cast<double>(reference.rows());
    for (std::size_t j = 0; j < reference.cols(); ++j) {
        ColumnStats c;
        c.name = reference.columns()[j].name;
        if (reference.columns()[j].kind == ColumnKind::binary) {
            c.pass_through = true;
            c.mean = 0.0;
            c.stddev = 1.0;
            stats.columns.push_back(std::move(c));
            continue;
        }
        double mean = 0.0;
        for (std::size_t i = 0; i < reference.rows(); ++i) mean += reference.at(i, j);
        mean /= n;
        double ss = 0.0;
        for (std::size_t i = 0; i < reference.rows(); ++i) {
            double d = reference.at(i, j) - mean;
            ss += d * d;
        }
        double sd = std::sqrt(ss / n);
        if (!(sd > 0.0)) {
            c.pass_through = true;
            c.zero_variance = true;
            c.mean = mean;
            c.stddev = 1.0;
        } else {
            c.mean = mean;
            c.stddev = sd;
        }
        stats.columns.push_back(std::move(c));
    }
    return stats;
}

namespace {

TabularDataset transform(const NormalizationStats& stats, const TabularDataset& data, bool forward) {
    if (data.cols() != stats.columns.size()) {
        fail(ErrorKind::SchemaMismatch,
             fmt::format("dataset has {} columns, normalizer has {}", data.cols(), stats.columns.size()));
    }
    for (std::size_t j = 0; j < data.cols(); ++j) {
        if (data.columns()[j].name != stats.columns[j].name) {
            fail(ErrorKind::SchemaMismatch, fmt::format("column {} is '{}' but normalizer expects '{}'", j,
                                                        data.columns()[j].name, stats.columns[j].name));
        }
    }
    RowMatrix out = data.features();
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        std::span<double> row(out.data() + i * out.cols(), static_cast<std::size_t>(out.cols()));
        if (forward) {
            stats.apply_inplace(row);
        } else {
            stats.invert_inplace(row);
        }
    }
    auto meta = data.columns();
    for (std::size_t j = 0; j < meta.size(); ++j) {
        if (!stats.columns[j].pass_through) meta[j].kind = ColumnKind::continuous;
    }
    return TabularDataset(std::move(out), std::move(meta),
                          data.has_labels() ? std::optional<std::vector<int>>(data.labels()) : std::nullopt);
}

} // namespace

TabularDataset apply_normalizer(const NormalizationStats& stats, const TabularDataset& data) {
    return transform(stats, data, true);
}

TabularDataset invert_normalizer(const NormalizationStats& stats, const TabularDataset& data) {
    return transform(stats, data, false);
}

} // namespace driftscope
