#include "driftscope/prototypes.hpp"

#include "driftscope/binarize.hpp"
#include "driftscope/distance.hpp"
#include "driftscope/error.hpp"
#include "driftscope/kernels.hpp"
#include "driftscope/stats.hpp"
#include "driftscope/tree.hpp"

#include <fmt/format.h>

#include <random>

namespace driftscope {

std::string_view to_string(Provenance p) {
    switch (p) {
    case Provenance::kmeans: return "kmeans";
    case Provenance::percentile_grid: return "percentile_grid";
    case Provenance::manual: return "manual";
    }
    return "unknown";
}

namespace {

double squared_l2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    return s;
}

RowMatrix kmeans_pp(const RowMatrix& x, std::size_t k, std::mt19937_64& rng) {
    const auto n = static_cast<std::size_t>(x.rows());
    RowMatrix centers(static_cast<Eigen::Index>(k), x.cols());
    std::vector<char> chosen(n, 0);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());

    std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    centers.row(0) = x.row(static_cast<Eigen::Index>(first));
    chosen[first] = 1;
    for (std::size_t c = 1; c < k; ++c) {
        auto last = kernels::row_span(centers, static_cast<Eigen::Index>(c - 1));
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], squared_l2(kernels::row_span(x, static_cast<Eigen::Index>(i)), last));
            if (!chosen[i]) total += d2[i];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            double u = std::uniform_real_distribution<double>(0.0, total)(rng);
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i] || d2[i] == 0.0) continue;
                pick = i;
                u -= d2[i];
                if (u < 0.0) break;
            }
        }
        // All remaining points coincide with a center: take the lowest unused row.
        if (pick == n) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
            }
        }
        chosen[pick] = 1;
        centers.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(pick));
    }
    return centers;
}

} // namespace

std::vector<Prototype> kmeans_prototypes(const TabularDataset& data, std::size_t k, std::uint64_t seed,
                                         std::size_t max_iter, Exec exec) {
    if (k < 1) fail(ErrorKind::InvalidArgument, "k must be at least 1");
    if (k > data.rows()) fail(ErrorKind::TooFewRows, fmt::format("k = {} exceeds the {} rows available", k, data.rows()));
    const RowMatrix& x = data.features();
    std::mt19937_64 rng(seed);
    RowMatrix centers = kmeans_pp(x, k, rng);

    std::vector<std::size_t> assign;
    for (std::size_t it = 0; it < max_iter; ++it) {
        auto a = kernels::assign_nearest(x, centers, Metric::euclidean, exec);
        if (a.index == assign) break;
        assign = std::move(a.index);
        RowMatrix sums = RowMatrix::Zero(centers.rows(), centers.cols());
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < assign.size(); ++i) {
            sums.row(static_cast<Eigen::Index>(assign[i])) += x.row(static_cast<Eigen::Index>(i));
            ++counts[assign[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) centers.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
        }
    }

    std::vector<Prototype> out(k);
    for (std::size_t c = 0; c < k; ++c) {
        out[c].id = c;
        out[c].features.assign(centers.row(static_cast<Eigen::Index>(c)).begin(), centers.row(static_cast<Eigen::Index>(c)).end());
        out[c].provenance = Provenance::kmeans;
    }
    return out;
}

std::vector<Prototype> percentile_grid_prototypes(const TabularDataset& data, const std::array<std::string, 2>& columns,
                                                  const std::vector<double>& percentiles, int label_tree_depth) {
    if (!data.has_labels()) fail(ErrorKind::UnlabeledDataset, "percentile-grid prototypes need labels for the label tree");
    if (data.empty()) fail(ErrorKind::EmptyDataset, "no rows to take percentiles of");
    if (percentiles.empty()) fail(ErrorKind::InvalidArgument, "no percentiles given");
    for (double p : percentiles) {
        if (!(p > 0.0 && p < 100.0)) fail(ErrorKind::InvalidArgument, fmt::format("percentile {} is outside (0, 100)", p));
    }
    std::array<std::size_t, 2> idx{};
    for (int c = 0; c < 2; ++c) {
        auto i = data.column_index(columns[c]);
        if (!i) fail(ErrorKind::UnknownColumn, fmt::format("no column named '{}'", columns[c]));
        idx[c] = *i;
    }

    auto column = [&](std::size_t j) {
        std::vector<double> v(data.rows());
        for (std::size_t i = 0; i < data.rows(); ++i) v[i] = data.at(i, j);
        return v;
    };
    std::vector<double> base(data.cols());
    for (std::size_t j = 0; j < data.cols(); ++j) base[j] = stats::percentile(column(j), 50.0);
    std::array<std::vector<double>, 2> grid;
    for (int c = 0; c < 2; ++c) {
        auto v = column(idx[c]);
        for (double p : percentiles) grid[c].push_back(stats::percentile(v, p));
    }

    // Label tree over the two grid columns only.
    RowMatrix two(static_cast<Eigen::Index>(data.rows()), 2);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        two(static_cast<Eigen::Index>(i), 0) = data.at(i, idx[0]);
        two(static_cast<Eigen::Index>(i), 1) = data.at(i, idx[1]);
    }
    auto pair = TabularDataset::from_matrix(two, {columns[0], columns[1]}, data.labels());
    auto scheme = fit_binarizer(pair, 16);
    auto tree = fit_greedy_tree(scheme.apply(pair), label_tree_depth, 0.0, 0);

    std::vector<Prototype> out;
    for (double a : grid[0]) {
        for (double b : grid[1]) {
            Prototype p;
            p.id = out.size();
            p.features = base;
            p.features[idx[0]] = a;
            p.features[idx[1]] = b;
            std::array<double, 2> xy{a, b};
            p.label = tree.predict(scheme.apply(xy));
            p.provenance = Provenance::percentile_grid;
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::vector<Prototype> manual_prototypes(const RowMatrix& points, const std::optional<std::vector<int>>& labels) {
    if (labels && labels->size() != static_cast<std::size_t>(points.rows())) {
        fail(ErrorKind::DimensionMismatch, "one label per prototype is required");
    }
    std::vector<Prototype> out(static_cast<std::size_t>(points.rows()));
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].id = i;
        auto r = kernels::row_span(points, static_cast<Eigen::Index>(i));
        out[i].features.assign(r.begin(), r.end());
        if (labels) out[i].label = (*labels)[i];
    }
    return out;
}

RowMatrix prototype_matrix(const std::vector<Prototype>& prototypes, bool label_aware) {
    if (prototypes.empty()) fail(ErrorKind::EmptyPrototypeSet, "no prototypes");
    const std::size_t m = prototypes.front().features.size();
    RowMatrix out(static_cast<Eigen::Index>(prototypes.size()), static_cast<Eigen::Index>(m + (label_aware ? 2 : 0)));
    for (std::size_t i = 0; i < prototypes.size(); ++i) {
        const auto& p = prototypes[i];
        if (p.features.size() != m) fail(ErrorKind::DimensionMismatch, "prototypes differ in length");
        for (std::size_t j = 0; j < m; ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p.features[j];
        if (label_aware) {
            if (!p.label) fail(ErrorKind::InvalidArgument, fmt::format("prototype {} has no label for label-aware distance", p.id));
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = *p.label == 0 ? 1.0 : 0.0;
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m + 1)) = *p.label == 1 ? 1.0 : 0.0;
        }
    }
    return out;
}

RowMatrix with_label_slots(const TabularDataset& data) {
    const auto& y = data.labels();
    RowMatrix out(static_cast<Eigen::Index>(data.rows()), static_cast<Eigen::Index>(data.cols() + 2));
    out.leftCols(static_cast<Eigen::Index>(data.cols())) = data.features();
    for (std::size_t i = 0; i < data.rows(); ++i) {
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(data.cols())) = y[i] == 0 ? 1.0 : 0.0;
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(data.cols() + 1)) = y[i] == 1 ? 1.0 : 0.0;
    }
    return out;
}

} // namespace driftscope
