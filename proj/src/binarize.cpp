#include "driftscope/binarize.hpp"

#include "driftscope/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace driftscope {

namespace {

double entropy(double pos, double total) {
    if (total <= 0.0 || pos <= 0.0 || pos >= total) return 0.0;
    double p = pos / total;
    return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

struct Candidate {
    double threshold;
    double gain;
};

} // namespace

double information_gain(std::span<const double> values, std::span<const int> labels, double threshold) {
    double n = 0, pos = 0, n_left = 0, pos_left = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        n += 1;
        pos += labels[i];
        if (values[i] <= threshold) {
            n_left += 1;
            pos_left += labels[i];
        }
    }
    if (n == 0) return 0.0;
    double n_right = n - n_left;
    double pos_right = pos - pos_left;
    return entropy(pos, n) - (n_left / n) * entropy(pos_left, n_left) - (n_right / n) * entropy(pos_right, n_right);
}

std::vector<std::string> BinarizationScheme::names() const {
    std::vector<std::string> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(f.name);
    return out;
}

std::vector<double> BinarizationScheme::apply(std::span<const double> row) const {
    if (row.size() != source_cols) {
        fail(ErrorKind::DimensionMismatch, fmt::format("row has {} values, scheme expects {}", row.size(), source_cols));
    }
    std::vector<double> out(features.size());
    for (std::size_t k = 0; k < features.size(); ++k) {
        const auto& f = features[k];
        out[k] = f.pass_through ? row[f.source] : (row[f.source] <= f.threshold ? 1.0 : 0.0);
    }
    return out;
}

TabularDataset BinarizationScheme::apply(const TabularDataset& data) const {
    RowMatrix out(static_cast<Eigen::Index>(data.rows()), static_cast<Eigen::Index>(features.size()));
    for (std::size_t i = 0; i < data.rows(); ++i) {
        auto b = apply(data.row(i));
        for (std::size_t k = 0; k < b.size(); ++k) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = b[k];
    }
    std::vector<ColumnMeta> meta;
    for (const auto& f : features) meta.push_back({f.name, ColumnKind::binary});
    return TabularDataset(std::move(out), std::move(meta),
                          data.has_labels() ? std::optional<std::vector<int>>(data.labels()) : std::nullopt);
}

std::vector<double> BinarizationScheme::to_source(std::span<const double> derived) const {
    if (derived.size() != features.size()) {
        fail(ErrorKind::DimensionMismatch, "derived vector length differs from scheme");
    }
    std::vector<double> out(source_cols, 0.0);
    for (std::size_t k = 0; k < features.size(); ++k) out[features[k].source] += derived[k];
    return out;
}

BinarizationScheme fit_binarizer(const TabularDataset& data, std::size_t max_thresholds_per_column) {
    if (!data.has_labels()) fail(ErrorKind::UnlabeledDataset, "binarization thresholds are chosen against labels");
    if (max_thresholds_per_column < 1) fail(ErrorKind::InvalidArgument, "max_thresholds_per_column must be >= 1");

    BinarizationScheme scheme;
    scheme.source_cols = data.cols();
    const auto& y = data.labels();
    const std::size_t n = data.rows();

    for (std::size_t j = 0; j < data.cols(); ++j) {
        const auto& col = data.columns()[j];
        if (col.kind == ColumnKind::binary) {
            scheme.features.push_back({j, col.name, true, 0.0, col.name});
            continue;
        }
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return data.at(a, j) < data.at(b, j); });

        // Sweep the sorted column once, evaluating the gain at every value boundary.
        double total_pos = 0;
        for (auto v : y) total_pos += v;
        const double total = static_cast<double>(n);
        const double parent = entropy(total_pos, total);
        std::vector<Candidate> candidates;
        double left_n = 0, left_pos = 0;
        for (std::size_t r = 0; r + 1 < n; ++r) {
            left_n += 1;
            left_pos += y[order[r]];
            double v = data.at(order[r], j);
            double next = data.at(order[r + 1], j);
            if (next == v) continue;
            double right_n = total - left_n;
            double right_pos = total_pos - left_pos;
            double gain = parent - (left_n / total) * entropy(left_pos, left_n) -
                          (right_n / total) * entropy(right_pos, right_n);
            if (gain > 1e-12) candidates.push_back({v + (next - v) / 2.0, gain});
        }
        std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.gain != b.gain) return a.gain > b.gain;
            return a.threshold < b.threshold;
        });
        if (candidates.size() > max_thresholds_per_column) candidates.resize(max_thresholds_per_column);
        std::sort(candidates.begin(), candidates.end(),
                  [](const Candidate& a, const Candidate& b) { return a.threshold < b.threshold; });
        for (const auto& c : candidates) {
            scheme.features.push_back({j, col.name, false, c.threshold,
                                       fmt::format("{} ≤ {}", col.name, format_number(c.threshold))});
        }
    }
    return scheme;
}

} // namespace driftscope
