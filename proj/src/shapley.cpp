#include "driftscope/shapley.hpp"

#include "driftscope/error.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>
#include <map>

namespace driftscope {

namespace {

const std::array<double, 171>& factorials() {
    static const auto table = [] {
        std::array<double, 171> t{};
        t[0] = 1.0;
        for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * static_cast<double>(i);
        return t;
    }();
    return table;
}

double fact(std::size_t n) {
    if (n >= factorials().size()) fail(ErrorKind::InvalidArgument, "coalition too large for factorial table");
    return factorials()[n];
}

void check_inputs(const DecisionTree& tree, std::span<const double> x, const Background& background) {
    if (background.size() == 0) fail(ErrorKind::EmptyBackground, "interventional Shapley needs background rows");
    if (x.size() != tree.n_features() || background.width() != tree.n_features()) {
        fail(ErrorKind::DimensionMismatch,
             fmt::format("tree has {} features, example {}, background {}", tree.n_features(), x.size(), background.width()));
    }
}

inline bool bit(double v) { return v > 0.5; }

struct PathWalk {
    const std::vector<TreeNode>& nodes;
    std::span<const double> x;
    std::span<const double> z;
    double weight;
    std::vector<double>& phi;
    std::vector<signed char> state; // +1 forced to x (in S), -1 forced to z (out of S)
    std::vector<std::size_t> in_s;
    std::vector<std::size_t> out_s;

    void leaf(const TreeNode& node) {
        const std::size_t a = in_s.size();
        const std::size_t b = out_s.size();
        if (a + b == 0) return;
        const double v = weight * node.positive_rate();
        if (v == 0.0) return;
        const double denom = fact(a + b);
        if (a > 0) {
            const double c = fact(a - 1) * fact(b) / denom * v;
            for (auto j : in_s) phi[j] += c;
        }
        if (b > 0) {
            const double c = fact(a) * fact(b - 1) / denom * v;
            for (auto j : out_s) phi[j] -= c;
        }
    }

    void walk(int id) {
        const auto& node = nodes[static_cast<std::size_t>(id)];
        if (node.is_leaf()) {
            leaf(node);
            return;
        }
        const auto f = static_cast<std::size_t>(node.feature);
        const bool xv = bit(x[f]);
        const bool zv = bit(z[f]);
        if (state[f] > 0) {
            walk(xv ? node.high : node.low);
            return;
        }
        if (state[f] < 0 || xv == zv) {
            walk(zv ? node.high : node.low);
            return;
        }
        state[f] = 1;
        in_s.push_back(f);
        walk(xv ? node.high : node.low);
        in_s.pop_back();
        state[f] = -1;
        out_s.push_back(f);
        walk(zv ? node.high : node.low);
        out_s.pop_back();
        state[f] = 0;
    }
};

} // namespace

std::string_view to_string(ShapleyAlgorithm algorithm) {
    switch (algorithm) {
    case ShapleyAlgorithm::automatic: return "automatic";
    case ShapleyAlgorithm::enumeration: return "enumeration";
    case ShapleyAlgorithm::path: return "path";
    }
    return "unknown";
}

Background::Background(const RowMatrix& rows) : total_(static_cast<std::size_t>(rows.rows())) {
    std::map<std::vector<double>, std::size_t> index;
    std::vector<std::vector<double>> unique;
    std::vector<double> counts;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        std::vector<double> key(rows.data() + i * rows.cols(), rows.data() + (i + 1) * rows.cols());
        auto [it, inserted] = index.emplace(key, unique.size());
        if (inserted) {
            unique.push_back(std::move(key));
            counts.push_back(0.0);
        }
        counts[it->second] += 1.0;
    }
    patterns_.resize(static_cast<Eigen::Index>(unique.size()), rows.cols());
    for (std::size_t u = 0; u < unique.size(); ++u) {
        for (std::size_t j = 0; j < unique[u].size(); ++j) {
            patterns_(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(j)) = unique[u][j];
        }
    }
    weights_.resize(counts.size());
    for (std::size_t u = 0; u < counts.size(); ++u) weights_[u] = counts[u] / static_cast<double>(total_);
}

double background_mean(const DecisionTree& tree, const Background& background) {
    if (background.size() == 0) fail(ErrorKind::EmptyBackground, "empty background");
    double m = 0.0;
    for (std::size_t u = 0; u < background.size(); ++u) m += background.weight(u) * tree.predict_proba(background.pattern(u));
    return m;
}

std::vector<double> tree_shapley_path(const DecisionTree& tree, std::span<const double> x, const Background& background) {
    check_inputs(tree, x, background);
    std::vector<double> phi(tree.n_features(), 0.0);
    for (std::size_t u = 0; u < background.size(); ++u) {
        PathWalk w{tree.nodes(), x, background.pattern(u), background.weight(u), phi,
                   std::vector<signed char>(tree.n_features(), 0), {}, {}};
        w.walk(0);
    }
    return phi;
}

std::vector<double> tree_shapley_enumeration(const DecisionTree& tree, std::span<const double> x,
                                             const Background& background) {
    check_inputs(tree, x, background);
    const auto used = tree.used_features();
    std::vector<double> phi(tree.n_features(), 0.0);
    std::vector<double> hybrid(tree.n_features());
    std::vector<double> values;
    for (std::size_t u = 0; u < background.size(); ++u) {
        auto z = background.pattern(u);
        std::vector<std::size_t> players;
        for (auto j : used) {
            if (bit(x[j]) != bit(z[j])) players.push_back(j);
        }
        const std::size_t d = players.size();
        if (d == 0) continue;
        if (d > 30) fail(ErrorKind::InvalidArgument, "too many disagreeing features for subset enumeration");
        const std::size_t n_sets = std::size_t{1} << d;
        values.assign(n_sets, 0.0);
        for (std::size_t mask = 0; mask < n_sets; ++mask) {
            std::copy(z.begin(), z.end(), hybrid.begin());
            for (std::size_t k = 0; k < d; ++k) {
                if (mask & (std::size_t{1} << k)) hybrid[players[k]] = x[players[k]];
            }
            values[mask] = tree.predict_proba(hybrid);
        }
        const double w = background.weight(u);
        const double d_fact = fact(d);
        for (std::size_t k = 0; k < d; ++k) {
            const std::size_t kbit = std::size_t{1} << k;
            double acc = 0.0;
            for (std::size_t mask = 0; mask < n_sets; ++mask) {
                if (mask & kbit) continue;
                const auto s = static_cast<std::size_t>(__builtin_popcountll(mask));
                acc += fact(s) * fact(d - s - 1) / d_fact * (values[mask | kbit] - values[mask]);
            }
            phi[players[k]] += w * acc;
        }
    }
    return phi;
}

std::vector<double> tree_shapley(const DecisionTree& tree, std::span<const double> x, const Background& background,
                                 ShapleyAlgorithm algorithm) {
    if (algorithm == ShapleyAlgorithm::automatic) {
        algorithm = tree.n_features() <= kEnumerationMaxFeatures ? ShapleyAlgorithm::enumeration : ShapleyAlgorithm::path;
    }
    return algorithm == ShapleyAlgorithm::enumeration ? tree_shapley_enumeration(tree, x, background)
                                                      : tree_shapley_path(tree, x, background);
}

} // namespace driftscope
