#include <doctest.h>

#include "driftscope/error.hpp"
#include "driftscope/rashomon.hpp"
#include "driftscope/shapley.hpp"
#include "driftscope/tree.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace driftscope;

namespace {

TabularDataset binary_dataset(const RowMatrix& x, std::vector<int> y) {
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < x.cols(); ++j) names.push_back("b" + std::to_string(j));
    std::vector<ColumnMeta> meta;
    for (auto& n : names) meta.push_back({n, ColumnKind::binary});
    return TabularDataset(x, meta, std::move(y));
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

} // namespace

TEST_CASE("pure labels give a root-only tree") {
    RowMatrix x(4, 2);
    x << 0, 0, 0, 1, 1, 0, 1, 1;
    auto t = fit_greedy_tree(binary_dataset(x, {1, 1, 1, 1}), 3, 0.0, 1);
    CHECK(t.leaf_count() == 1);
    CHECK(t.predict(std::vector<double>{0, 0}) == 1);
}

TEST_CASE("XOR at depth 2 with lambda 0 is fit exactly with 4 leaves") {
    RowMatrix x(4, 2);
    x << 0, 0, 0, 1, 1, 0, 1, 1;
    auto data = binary_dataset(x, {0, 1, 1, 0});
    auto t = fit_greedy_tree(data, 2, 0.0, 7);
    CHECK(t.leaf_count() == 4);
    CHECK(t.regularized_loss(data) == 0.0);
    double frac = 0;
    for (const auto& n : t.nodes()) {
        if (n.is_leaf()) frac += n.fraction;
    }
    CHECK(frac == doctest::Approx(1.0));
}

TEST_CASE("lambda >= 0.5 always yields a root-only tree") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        auto x = oracle::random_binary_rows(40, 5, rng);
        std::vector<int> y;
        for (int i = 0; i < 40; ++i) y.push_back(x(i, 0) > 0.5 ? 1 : 0);
        auto t = fit_greedy_tree(binary_dataset(x, y), 4, 0.5, trial);
        CHECK(t.leaf_count() == 1);
    }
}

TEST_CASE("fitted trees test distinct features on every path") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        auto x = oracle::random_binary_rows(80, 6, rng);
        std::vector<int> y;
        std::bernoulli_distribution noise(0.1);
        for (int i = 0; i < 80; ++i) y.push_back(((x(i, 0) > 0.5) ^ (x(i, 3) > 0.5) ^ noise(rng)) ? 1 : 0);
        auto t = fit_greedy_tree(binary_dataset(x, y), 4, 0.0, trial, 0.7);
        std::vector<std::vector<int>> path_features(t.nodes().size());
        for (std::size_t i = 0; i < t.nodes().size(); ++i) {
            const auto& n = t.nodes()[i];
            if (n.is_leaf()) continue;
            for (int f : path_features[i]) CHECK(f != n.feature);
            for (int c : {n.low, n.high}) {
                path_features[c] = path_features[i];
                path_features[c].push_back(n.feature);
            }
        }
        CHECK(t.depth() <= 4);
    }
}

TEST_CASE("tree fitting rejects unlabeled or non-binary data") {
    RowMatrix x(2, 1);
    x << 0, 1;
    std::vector<ColumnMeta> meta{{"b0", ColumnKind::binary}};
    CHECK_THROWS_AS(fit_greedy_tree(TabularDataset(x, meta), 2, 0.0, 1), Error);
}

TEST_CASE("root-only tree attributes nothing") {
    DecisionTree t({TreeNode{-1, -1, -1, {3, 5}, 1.0, 1}}, 3, 0, 0.0);
    std::mt19937_64 rng(1);
    Background bg(oracle::random_binary_rows(10, 3, rng));
    std::vector<double> x{1, 0, 1};
    for (auto alg : {ShapleyAlgorithm::enumeration, ShapleyAlgorithm::path}) {
        CHECK(tree_shapley(t, x, bg, alg) == std::vector<double>(3, 0.0));
    }
}

TEST_CASE("a stump puts all attribution on its feature") {
    std::vector<TreeNode> nodes(3);
    nodes[0].feature = 1;
    nodes[0].low = 1;
    nodes[0].high = 2;
    nodes[1].class_counts = {9, 1};
    nodes[2].class_counts = {2, 8};
    DecisionTree t(nodes, 4, 1, 0.0);
    std::mt19937_64 rng(3);
    auto bgm = oracle::random_binary_rows(16, 4, rng);
    Background bg(bgm);
    std::vector<double> x{0, 1, 0, 1};
    for (auto alg : {ShapleyAlgorithm::enumeration, ShapleyAlgorithm::path}) {
        auto phi = tree_shapley(t, x, bg, alg);
        CHECK(phi[0] == 0.0);
        CHECK(phi[2] == 0.0);
        CHECK(phi[3] == 0.0);
        CHECK(phi[1] == doctest::Approx(0.8 - background_mean(t, bg)).epsilon(1e-12));
    }
}

TEST_CASE("both algorithms equal the naive definition on depth-2 trees over 3 features") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        auto t = oracle::random_tree(3, 2, rng);
        auto bgm = oracle::random_binary_rows(9, 3, rng);
        Background bg(bgm);
        auto xs = oracle::random_binary_rows(1, 3, rng);
        std::vector<double> x(xs.data(), xs.data() + 3);
        auto ref = oracle::naive_shapley(t, x, bgm);
        auto e = tree_shapley_enumeration(t, x, bg);
        auto p = tree_shapley_path(t, x, bg);
        for (int j = 0; j < 3; ++j) {
            CHECK(std::abs(e[j] - ref[j]) <= 1e-9);
            CHECK(std::abs(p[j] - ref[j]) <= 1e-9);
        }
    }
}

TEST_CASE("efficiency, dummy and oracle equivalence on random trees up to 10 features") {
    std::mt19937_64 rng(99);
    double worst = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
        int m = 2 + trial % 9;
        auto t = oracle::random_tree(m, 1 + trial % 4, rng);
        auto bgm = oracle::random_binary_rows(12, m, rng);
        Background bg(bgm);
        auto xs = oracle::random_binary_rows(1, m, rng);
        std::vector<double> x(xs.data(), xs.data() + m);
        auto ref = oracle::naive_shapley(t, x, bgm);
        auto p = tree_shapley_path(t, x, bg);
        auto e = tree_shapley_enumeration(t, x, bg);
        const double gap = t.predict_proba(x) - background_mean(t, bg);
        CHECK(std::abs(sum(p) - gap) <= 1e-9);
        CHECK(std::abs(sum(e) - gap) <= 1e-9);
        auto used = t.used_features();
        for (int j = 0; j < m; ++j) {
            worst = std::max({worst, std::abs(p[j] - ref[j]), std::abs(e[j] - ref[j])});
            if (!std::binary_search(used.begin(), used.end(), static_cast<std::size_t>(j))) {
                CHECK(e[j] == 0.0);
                CHECK(std::abs(p[j]) <= 1e-9);
            }
        }
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("symmetric features receive swapped attributions") {
    // f = 1 iff b0 and b1 both set: b0 and b1 play identical roles.
    std::vector<TreeNode> nodes(5);
    nodes[0] = {0, 1, 2, {0, 0}, 1.0, 0};
    nodes[1].class_counts = {5, 0};
    nodes[2] = {1, 3, 4, {0, 0}, 0.5, 0};
    nodes[3].class_counts = {5, 0};
    nodes[4].class_counts = {0, 5};
    DecisionTree t(nodes, 3, 2, 0.0);
    RowMatrix bgm(4, 3);
    bgm << 0, 0, 0, 0, 1, 1, 1, 0, 0, 1, 1, 1;
    Background bg(bgm);
    std::vector<double> x{1, 0, 1}, xs{0, 1, 1};
    auto a = tree_shapley_path(t, x, bg);
    auto b = tree_shapley_path(t, xs, bg);
    CHECK(a[0] == doctest::Approx(b[1]));
    CHECK(a[1] == doctest::Approx(b[0]));
}

TEST_CASE("ensemble membership respects epsilon") {
    std::mt19937_64 rng(17);
    auto x = oracle::random_binary_rows(120, 6, rng);
    std::vector<int> y;
    std::bernoulli_distribution noise(0.15);
    for (int i = 0; i < 120; ++i) y.push_back(((x(i, 0) > 0.5) || (x(i, 2) > 0.5 && x(i, 4) > 0.5)) ^ noise(rng) ? 1 : 0);
    auto data = binary_dataset(x, y);

    EnsembleConfig cfg;
    cfg.bootstraps = 4;
    cfg.candidates_per_bootstrap = 6;
    cfg.epsilon = 10.0;
    cfg.seed = 3;
    auto wide = build_ensemble(data, cfg);
    for (const auto& b : wide.bootstraps) CHECK(b.members.size() == 6);

    cfg.epsilon = 0.0;
    auto tight = build_ensemble(data, cfg);
    for (const auto& b : tight.bootstraps) {
        CHECK(b.members.size() >= 1);
        for (double l : b.member_losses) CHECK(l == b.best_loss);
    }

    cfg.epsilon = 0.02;
    auto mid = build_ensemble(data, cfg);
    for (const auto& b : mid.bootstraps) {
        auto boot = data.subset(b.sample);
        for (const auto& t : b.members) CHECK(t.regularized_loss(boot) <= b.best_loss + 0.02);
    }
}

TEST_CASE("distinct bootstrap replicates differ") {
    int differ = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        if (bootstrap_sample(10, s, 0) != bootstrap_sample(10, s, 1)) ++differ;
    }
    CHECK(differ == 100);
}

TEST_CASE("LiFIM weights follow the bootstrap-then-member average") {
    // Three stumps on different features, hand-placed into two replicates.
    auto stump = [](int f, double lo1, double hi1) {
        std::vector<TreeNode> n(3);
        n[0].feature = f;
        n[0].low = 1;
        n[0].high = 2;
        n[1].class_counts = {1 - lo1, lo1};
        n[2].class_counts = {1 - hi1, hi1};
        return DecisionTree(n, 3, 1, 0.0);
    };
    RowMatrix bgm(2, 3);
    bgm << 0, 0, 0, 1, 1, 1;
    Background bg(bgm);
    std::vector<double> x{1, 1, 1};
    RashomonEnsemble ens;
    ens.n_features = 3;
    ens.bootstraps.resize(2);
    ens.bootstraps[0].members = {stump(0, 0.0, 1.0), stump(1, 0.0, 1.0)};
    ens.bootstraps[1].members = {stump(2, 0.0, 1.0)};
    auto phi = lifim(ens, x, bg);
    // Each stump's own attribution on its feature is 1 - 0.5 = 0.5.
    CHECK(phi[0] == doctest::Approx(0.25 * 0.5));
    CHECK(phi[1] == doctest::Approx(0.25 * 0.5));
    CHECK(phi[2] == doctest::Approx(0.5 * 0.5));

    RashomonEnsemble same;
    same.n_features = 3;
    same.bootstraps.resize(3);
    for (auto& b : same.bootstraps) b.members = {stump(1, 0.2, 0.9), stump(1, 0.2, 0.9)};
    auto lf = tree_shapley(stump(1, 0.2, 0.9), x, bg);
    auto li = lifim(same, x, bg);
    for (int j = 0; j < 3; ++j) CHECK(li[j] == doctest::Approx(lf[j]));
}

TEST_CASE("GiFIM is the row mean and is invariant to duplication") {
    std::mt19937_64 rng(5);
    auto x = oracle::random_binary_rows(60, 4, rng);
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) y.push_back(x(i, 1) > 0.5 ? 1 : 0);
    auto data = binary_dataset(x, y);
    EnsembleConfig cfg;
    cfg.bootstraps = 3;
    cfg.candidates_per_bootstrap = 3;
    auto ens = build_ensemble(data, cfg);
    Background bg(select_background(data, 32, 1));

    auto one = data.subset(std::vector<std::size_t>{7});
    auto g1 = gifim(ens, one, bg);
    auto l7 = lifim(ens, data.row(7), bg);
    for (int j = 0; j < 4; ++j) CHECK(g1.values[j] == doctest::Approx(l7[j]));

    std::vector<std::size_t> twice(120);
    for (std::size_t i = 0; i < 120; ++i) twice[i] = i % 60;
    auto g = gifim(ens, data, bg);
    auto g2 = gifim(ens, data.subset(twice), bg);
    for (int j = 0; j < 4; ++j) CHECK(g.values[j] == doctest::Approx(g2.values[j]).epsilon(1e-12));

    CHECK_THROWS_AS(gifim(ens, data.subset(std::vector<std::size_t>{}), bg), Error);
}

TEST_CASE("ensembles and GiFIM are bit-identical across runs and thread counts") {
    std::mt19937_64 rng(23);
    auto x = oracle::random_binary_rows(150, 7, rng);
    std::vector<int> y;
    std::bernoulli_distribution noise(0.2);
    for (int i = 0; i < 150; ++i) y.push_back((x(i, 2) > 0.5) ^ noise(rng) ? 1 : 0);
    auto data = binary_dataset(x, y);
    EnsembleConfig cfg;
    cfg.bootstraps = 5;
    cfg.candidates_per_bootstrap = 4;
    cfg.seed = 77;
    Background bg(select_background(data, 64, cfg.seed));

    auto e1 = build_ensemble(data, cfg, Exec::serial);
    set_num_workers(4);
    auto e2 = build_ensemble(data, cfg, Exec::omp);
    auto b_omp = lifim_batch_omp(e2, data.features(), bg);
    set_num_workers(1);
    auto b_ser = lifim_batch_serial(e1, data.features(), bg);
    REQUIRE(e1.member_count() == e2.member_count());
    for (std::size_t b = 0; b < e1.bootstraps.size(); ++b) {
        for (std::size_t m = 0; m < e1.bootstraps[b].members.size(); ++m) {
            CHECK(e1.bootstraps[b].members[m].signature() == e2.bootstraps[b].members[m].signature());
        }
    }
    CHECK(b_ser == b_omp);
    auto g1 = gifim(e1, data, bg, "D", ShapleyAlgorithm::automatic, Exec::serial);
    auto g2 = gifim(build_ensemble(data, cfg, Exec::serial), data, bg, "D", ShapleyAlgorithm::automatic, Exec::serial);
    CHECK(g1.values == g2.values);
}
