#include "driftscope/tree.hpp"

#include "driftscope/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace driftscope {

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::size_t n_features, int depth_limit, double lambda)
    : nodes_(std::move(nodes)), n_features_(n_features), depth_limit_(depth_limit), lambda_(lambda) {
    if (nodes_.empty()) fail(ErrorKind::InvalidArgument, "a tree needs at least a root");
}

std::size_t DecisionTree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int DecisionTree::depth() const {
    std::vector<int> d(nodes_.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.is_leaf()) {
            best = std::max(best, d[i]);
            continue;
        }
        d[static_cast<std::size_t>(n.low)] = d[i] + 1;
        d[static_cast<std::size_t>(n.high)] = d[i] + 1;
    }
    return best;
}

std::vector<std::size_t> DecisionTree::used_features() const {
    std::vector<std::size_t> out;
    for (const auto& n : nodes_) {
        if (!n.is_leaf()) out.push_back(static_cast<std::size_t>(n.feature));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int DecisionTree::leaf_for(std::span<const double> x) const {
    int i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
        const auto& n = nodes_[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] > 0.5 ? n.high : n.low;
    }
    return i;
}

double DecisionTree::regularized_loss(const TabularDataset& data) const {
    if (data.empty()) fail(ErrorKind::EmptyDataset, "loss over an empty dataset");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        if (predict(data.row(i)) != data.label(i)) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(data.rows()) + lambda_ * static_cast<double>(leaf_count());
}

std::string DecisionTree::signature() const {
    std::string out;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        const auto& n = nodes_[static_cast<std::size_t>(i)];
        if (n.is_leaf()) {
            out += fmt::format("L{};", n.prediction);
        } else {
            out += fmt::format("S{}(", n.feature);
            stack.push_back(n.high);
            stack.push_back(n.low);
        }
    }
    return out;
}

namespace {

double entropy2(double c0, double c1) {
    double n = c0 + c1;
    if (n <= 0.0 || c0 <= 0.0 || c1 <= 0.0) return 0.0;
    double p = c1 / n;
    return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

class Grower {
public:
    Grower(const TabularDataset& data, int depth, double lambda, std::uint64_t seed, double subsample)
        : data_(data), y_(data.labels()), lambda_(lambda), depth_(depth), subsample_(subsample), rng_(seed),
          total_(static_cast<double>(data.rows())), used_(data.cols(), 0) {}

    std::vector<TreeNode> run() {
        std::vector<std::size_t> rows(data_.rows());
        std::iota(rows.begin(), rows.end(), 0);
        grow(rows, depth_);
        return std::move(nodes_);
    }

private:
    // Returns the regularized loss contribution of the subtree rooted at the node it appends.
    double grow(const std::vector<std::size_t>& rows, int depth_left) {
        const auto id = nodes_.size();
        nodes_.emplace_back();
        std::array<double, 2> counts{0.0, 0.0};
        for (auto r : rows) counts[static_cast<std::size_t>(y_[r])] += 1.0;
        {
            auto& node = nodes_[id];
            node.class_counts = counts;
            node.fraction = static_cast<double>(rows.size()) / total_;
            node.prediction = counts[1] > counts[0] ? 1 : 0;
        }
        const double leaf_loss = std::min(counts[0], counts[1]) / total_ + lambda_;
        if (depth_left <= 0 || counts[0] == 0.0 || counts[1] == 0.0) return leaf_loss;

        std::vector<std::size_t> available;
        for (std::size_t j = 0; j < data_.cols(); ++j) {
            if (!used_[j]) available.push_back(j);
        }
        if (subsample_ < 1.0 && !available.empty()) {
            auto keep = static_cast<std::size_t>(std::ceil(subsample_ * static_cast<double>(available.size())));
            keep = std::clamp<std::size_t>(keep, 1, available.size());
            std::shuffle(available.begin(), available.end(), rng_);
            available.resize(keep);
            std::sort(available.begin(), available.end());
        }

        const double parent_h = entropy2(counts[0], counts[1]);
        const double n = static_cast<double>(rows.size());
        int best = -1;
        double best_gain = -1.0;
        for (auto j : available) {
            std::array<double, 2> hi{0.0, 0.0};
            for (auto r : rows) {
                if (data_.at(r, j) > 0.5) hi[static_cast<std::size_t>(y_[r])] += 1.0;
            }
            double n_hi = hi[0] + hi[1];
            if (n_hi == 0.0 || n_hi == n) continue;
            double lo0 = counts[0] - hi[0], lo1 = counts[1] - hi[1];
            double gain = parent_h - (n_hi / n) * entropy2(hi[0], hi[1]) - ((n - n_hi) / n) * entropy2(lo0, lo1);
            if (gain > best_gain) {
                best_gain = gain;
                best = static_cast<int>(j);
            }
        }
        if (best < 0) return leaf_loss;

        std::vector<std::size_t> lo_rows, hi_rows;
        for (auto r : rows) {
            (data_.at(r, static_cast<std::size_t>(best)) > 0.5 ? hi_rows : lo_rows).push_back(r);
        }
        used_[static_cast<std::size_t>(best)] = 1;
        const int low = static_cast<int>(nodes_.size());
        double sub = grow(lo_rows, depth_left - 1);
        const int high = static_cast<int>(nodes_.size());
        sub += grow(hi_rows, depth_left - 1);
        used_[static_cast<std::size_t>(best)] = 0;

        if (sub < leaf_loss - 1e-12) {
            auto& node = nodes_[id];
            node.feature = best;
            node.low = low;
            node.high = high;
            return sub;
        }
        nodes_.resize(id + 1);
        return leaf_loss;
    }

    const TabularDataset& data_;
    const std::vector<int>& y_;
    double lambda_;
    int depth_;
    double subsample_;
    std::mt19937_64 rng_;
    double total_;
    std::vector<char> used_;
    std::vector<TreeNode> nodes_;
};

} // namespace

DecisionTree fit_greedy_tree(const TabularDataset& data, int depth, double lambda, std::uint64_t seed,
                             double feature_subsample) {
    if (!data.has_labels()) fail(ErrorKind::UnlabeledDataset, "tree fitting needs labels");
    if (data.empty()) fail(ErrorKind::EmptyDataset, "tree fitting needs at least one row");
    if (depth < 0) fail(ErrorKind::InvalidArgument, "depth must be >= 0");
    if (lambda < 0.0) fail(ErrorKind::InvalidArgument, "lambda must be >= 0");
    if (!(feature_subsample > 0.0 && feature_subsample <= 1.0)) {
        fail(ErrorKind::InvalidArgument, "feature_subsample must lie in (0, 1]");
    }
    for (std::size_t j = 0; j < data.cols(); ++j) {
        if (data.columns()[j].kind != ColumnKind::binary) {
            fail(ErrorKind::SchemaMismatch, fmt::format("column '{}' is not binary; binarize first", data.columns()[j].name));
        }
    }
    Grower grower(data, depth, lambda, seed, feature_subsample);
    return DecisionTree(grower.run(), data.cols(), depth, lambda);
}

} // namespace driftscope
