#include "driftscope/partial.hpp"

#include "driftscope/error.hpp"
#include "driftscope/kernels.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace driftscope {

std::vector<double> importance_ranks(std::span<const double> importance) {
    std::vector<std::size_t> order(importance.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(importance[a]) > std::abs(importance[b]); });
    std::vector<double> rank(importance.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = static_cast<double>(r + 1);
    return rank;
}

double feature_score_ranked(std::size_t j, std::span<const double> x_p, std::span<const double> x_n,
                            std::span<const double> ranks_p, std::span<const double> ranks_n, const ScoreWeights& c) {
    if (j >= x_p.size() || j >= x_n.size()) {
        fail(ErrorKind::IndexOutOfRange, fmt::format("feature {} is out of range", j));
    }
    double s = c.c3 * std::abs(x_p[j] - x_n[j]);
    if (c.c1 != 0.0 || c.c2 != 0.0) {
        if (j >= ranks_p.size() || j >= ranks_n.size()) {
            fail(ErrorKind::IndexOutOfRange, fmt::format("feature {} has no importance rank", j));
        }
        s += c.c1 * std::abs(ranks_p[j] - ranks_n[j]) + c.c2 * (0.5 * ranks_p[j] + 0.5 * ranks_n[j]);
    }
    return s;
}

double feature_score(std::size_t j, std::span<const double> x_p, std::span<const double> x_n,
                     std::span<const double> importance_p, std::span<const double> importance_n, const ScoreWeights& c) {
    if (importance_p.size() != x_p.size() || importance_n.size() != x_n.size()) {
        fail(ErrorKind::DimensionMismatch, "importance vectors must have one entry per feature");
    }
    return feature_score_ranked(j, x_p, x_n, importance_ranks(importance_p), importance_ranks(importance_n), c);
}

namespace {

void check_weights(const ScoreWeights& c) {
    if (c.c1 < 0.0 || c.c2 < 0.0 || c.c3 < 0.0) fail(ErrorKind::InvalidArgument, "c1, c2, c3 must be non-negative");
}

RowMatrix abs_diffs(const Prototype& p, const TabularDataset& data, const std::vector<std::size_t>& rows) {
    RowMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(data.cols()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto x = data.row(rows[r]);
        for (std::size_t j = 0; j < x.size(); ++j) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = std::abs(p.features[j] - x[j]);
    }
    return out;
}

RowMatrix neighbour_ranks(const TabularDataset& data, const std::vector<std::size_t>& rows, const LifimProvider& provider,
                          Side side) {
    RowMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(data.cols()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto phi = provider(data.row(rows[r]), side);
        if (phi.size() != data.cols()) fail(ErrorKind::DimensionMismatch, "importance provider returned the wrong width");
        auto u = importance_ranks(phi);
        for (std::size_t j = 0; j < u.size(); ++j) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = u[j];
    }
    return out;
}

std::vector<double> column_means(const RowMatrix& m) {
    std::vector<double> out(static_cast<std::size_t>(m.cols()), 0.0);
    if (m.rows() == 0) return out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(j)] += m(i, j);
    }
    for (auto& v : out) v /= static_cast<double>(m.rows());
    return out;
}

} // namespace

PrototypeScoring prepare_scoring(const Prototype& prototype, const TabularDataset& d, const TabularDataset& d_prime,
                                 const PartialOptions& options, const LifimProvider* provider) {
    check_weights(options.weights);
    if (d.cols() != d_prime.cols()) fail(ErrorKind::SchemaMismatch, "datasets differ in width");
    PrototypeScoring s;
    s.prototype = prototype;
    auto dist_d = prototype_distances(prototype, d, options.neighbourhood);
    auto dist_dp = prototype_distances(prototype, d_prime, options.neighbourhood);
    s.radius_d = resolve_delta(prototype, d, options.delta, options.neighbourhood);
    s.radius_dp = options.delta.is_percentile && options.delta_per_side
                      ? resolve_delta(prototype, d_prime, options.delta, options.neighbourhood)
                      : s.radius_d;
    s.rows_d = rows_within(dist_d, s.radius_d);
    s.rows_dp = rows_within(dist_dp, s.radius_dp);
    s.diff_d = abs_diffs(prototype, d, s.rows_d);
    s.diff_dp = abs_diffs(prototype, d_prime, s.rows_dp);

    const bool need_ranks = options.weights.c1 != 0.0 || options.weights.c2 != 0.0;
    if (provider != nullptr && *provider) {
        auto phi = (*provider)(prototype.features, Side::d);
        if (phi.size() != prototype.features.size()) fail(ErrorKind::DimensionMismatch, "importance provider returned the wrong width");
        s.prototype_ranks = importance_ranks(phi);
        s.ranks_d = neighbour_ranks(d, s.rows_d, *provider, Side::d);
        s.ranks_dp = neighbour_ranks(d_prime, s.rows_dp, *provider, Side::d_prime);
        s.has_ranks = true;
    } else if (need_ranks) {
        fail(ErrorKind::InvalidArgument, "c1 or c2 is nonzero but no importance provider was given");
    }
    return s;
}

std::vector<double> PrototypeScoring::scores(const ScoreWeights& c) const {
    check_weights(c);
    const bool use_ranks = c.c1 != 0.0 || c.c2 != 0.0;
    if (use_ranks && !has_ranks) fail(ErrorKind::InvalidArgument, "scoring with rank terms needs importance ranks");
    const std::size_t m = width();
    std::vector<double> total(m, 0.0);
    auto side = [&](const RowMatrix& diff, const RowMatrix& ranks) {
        if (diff.rows() == 0) return;
        std::vector<double> acc(m, 0.0);
        for (Eigen::Index r = 0; r < diff.rows(); ++r) {
            for (std::size_t j = 0; j < m; ++j) {
                const auto jj = static_cast<Eigen::Index>(j);
                double s = c.c3 * diff(r, jj);
                if (use_ranks) {
                    s += c.c1 * std::abs(prototype_ranks[j] - ranks(r, jj)) + c.c2 * (0.5 * prototype_ranks[j] + 0.5 * ranks(r, jj));
                }
                acc[j] += s;
            }
        }
        for (std::size_t j = 0; j < m; ++j) total[j] += acc[j] / static_cast<double>(diff.rows());
    };
    side(diff_d, ranks_d);
    side(diff_dp, ranks_dp);
    return total;
}

PrototypeScoring::Components PrototypeScoring::components() const {
    const std::size_t m = width();
    Components out{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    int sides = 0;
    auto side = [&](const RowMatrix& diff, const RowMatrix& ranks) {
        if (diff.rows() == 0) return;
        ++sides;
        auto v = column_means(diff);
        for (std::size_t j = 0; j < m; ++j) out.value_deviation[j] += v[j];
        if (!has_ranks) return;
        for (std::size_t j = 0; j < m; ++j) {
            double rd = 0.0, ar = 0.0;
            for (Eigen::Index r = 0; r < ranks.rows(); ++r) {
                const double u = ranks(r, static_cast<Eigen::Index>(j));
                rd += std::abs(prototype_ranks[j] - u);
                ar += 0.5 * prototype_ranks[j] + 0.5 * u;
            }
            out.rank_difference[j] += rd / static_cast<double>(ranks.rows());
            out.absolute_rank[j] += ar / static_cast<double>(ranks.rows());
        }
    };
    side(diff_d, ranks_d);
    side(diff_dp, ranks_dp);
    if (sides > 1) {
        for (auto* v : {&out.rank_difference, &out.absolute_rank, &out.value_deviation}) {
            for (auto& x : *v) x /= sides;
        }
    }
    return out;
}

std::vector<std::size_t> lowest_k(const std::vector<double>& scores, std::size_t k) {
    if (k < 1) fail(ErrorKind::InvalidArgument, "K must be at least 1");
    if (k > scores.size()) fail(ErrorKind::InvalidArgument, fmt::format("K = {} exceeds the {} features", k, scores.size()));
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    order.resize(k);
    return order;
}

PartialPrototype select_partial(const PrototypeScoring& scoring, std::size_t k, const ScoreWeights& c) {
    PartialPrototype out;
    out.parent = scoring.prototype.id;
    out.scores = scoring.scores(c);
    out.indices = lowest_k(out.scores, k);
    for (auto j : out.indices) out.values.push_back(scoring.prototype.features[j]);
    out.neighbours_d = scoring.rows_d.size();
    out.neighbours_dp = scoring.rows_dp.size();
    out.empty_d = scoring.rows_d.empty();
    out.empty_dp = scoring.rows_dp.empty();
    return out;
}

std::vector<PartialPrototype> partial_prototypes(const std::vector<Prototype>& prototypes, const TabularDataset& d,
                                                 const TabularDataset& d_prime, const PartialOptions& options,
                                                 const LifimProvider* provider) {
    if (prototypes.empty()) fail(ErrorKind::NoPrototypes, "no prototypes to restrict");
    std::vector<PartialPrototype> out;
    out.reserve(prototypes.size());
    for (const auto& p : prototypes) {
        out.push_back(select_partial(prepare_scoring(p, d, d_prime, options, provider), options.k, options.weights));
    }
    return out;
}

} // namespace driftscope
