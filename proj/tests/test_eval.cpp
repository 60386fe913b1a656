#include "doctest.h"

#include "driftscope/binarize.hpp"
#include "driftscope/error.hpp"
#include "driftscope/metrics.hpp"
#include "driftscope/neighbourhood.hpp"
#include "driftscope/sweeps.hpp"
#include "driftscope/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace driftscope;

namespace {

std::vector<double> distinct_values(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

// Fraction of ordered pairs (j, k), j != k, whose comparison agrees: the
// expectation the anchored Monte Carlo estimate converges to.
double pair_agreement(const std::vector<double>& a, const std::vector<double>& b) {
    auto sgn = [](double v) { return (v > 0) - (v < 0); };
    std::size_t agree = 0, total = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (j == k) continue;
            ++total;
            agree += sgn(a[j] - a[k]) == sgn(b[j] - b[k]);
        }
    }
    return static_cast<double>(agree) / static_cast<double>(total);
}

std::vector<Prototype> center_prototypes(const RowMatrix& centers) {
    std::vector<Prototype> out;
    for (Eigen::Index i = 0; i < centers.rows(); ++i) {
        out.push_back({static_cast<std::size_t>(i), {centers(i, 0), centers(i, 1)}, std::nullopt, Provenance::manual});
    }
    return out;
}

} // namespace

TEST_CASE("rta: self, reversal, random baseline") {
    auto a = distinct_values(50, 1);
    CHECK(random_triplet_accuracy(a, a, 1000, 7) == 1.0);
    std::vector<double> rev(a.size());
    std::transform(a.begin(), a.end(), rev.begin(), [](double v) { return -v; });
    CHECK(random_triplet_accuracy(a, rev, 1000, 7) == 0.0);
    auto b = distinct_values(50, 2);
    CHECK(std::abs(random_triplet_accuracy(a, b, 1000, 7) - 0.5) <= 0.05);
}

TEST_CASE("rta: symmetric in its arguments and converges to the pair agreement") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto a = distinct_values(12, s), b = distinct_values(12, s + 100);
        CHECK(random_triplet_accuracy(a, b, 500, s) == random_triplet_accuracy(b, a, 500, s));
        CHECK(std::abs(random_triplet_accuracy(a, b, 4000, s) - pair_agreement(a, b)) <= 0.05);
    }
}

TEST_CASE("rta: a tie agrees only with a tie") {
    std::vector<double> a{1, 1, 2}, b{1, 2, 3};
    CHECK(pair_agreement(a, b) == doctest::Approx(2.0 / 3.0));
    CHECK(std::abs(random_triplet_accuracy(a, b, 3000, 3) - 2.0 / 3.0) <= 0.05);
    CHECK(random_triplet_accuracy(a, a, 100, 3) == 1.0);
}

TEST_CASE("rta: pairwise form over points") {
    RowMatrix pts(6, 2);
    pts << 0, 0, 1, 0, 3, 1, 5, 5, 2, 7, 9, 1;
    PairDistance euclid = [&](std::size_t i, std::size_t j) { return (pts.row(i) - pts.row(j)).norm(); };
    PairDistance scaled = [&](std::size_t i, std::size_t j) { return 3.0 * (pts.row(i) - pts.row(j)).norm(); };
    CHECK(random_triplet_accuracy(6, euclid, scaled, 1000, 1) == 1.0);
}

TEST_CASE("rta: errors") {
    std::vector<double> two{1, 2};
    CHECK_THROWS_AS(random_triplet_accuracy(two, two, 10, 0), Error);
    try {
        random_triplet_accuracy(two, two, 10, 0);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TooFewItems);
    }
    std::vector<double> three{1, 2, 3}, four{1, 2, 3, 4};
    try {
        random_triplet_accuracy(three, four, 10, 0);
        FAIL("expected LengthMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LengthMismatch);
    }
}

TEST_CASE("gpa: identity, cyclic derangement, random baseline") {
    auto a = distinct_values(20, 5);
    CHECK(global_permutation_accuracy(a, a) == 1.0);

    // b gives element order[i] the rank of order[i + 1], a cyclic shift of a's argsort.
    auto order = stable_argsort(a);
    std::vector<double> b(a.size());
    for (std::size_t r = 0; r < order.size(); ++r) b[order[(r + 1) % order.size()]] = static_cast<double>(r);
    CHECK(global_permutation_accuracy(a, b) == 0.0);

    double mean = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) mean += global_permutation_accuracy(distinct_values(20, 1000 + s), distinct_values(20, 5000 + s));
    mean /= 200.0;
    CHECK(std::abs(mean - 1.0 / 20.0) <= 0.05);
}

TEST_CASE("gpa: symmetric, ties by index, length errors") {
    auto a = distinct_values(15, 8), b = distinct_values(15, 9);
    CHECK(global_permutation_accuracy(a, b) == global_permutation_accuracy(b, a));
    std::vector<double> tied{2, 1, 1, 2}, ordered{3, 0, 1, 4};
    CHECK(stable_argsort(tied) == std::vector<std::size_t>{1, 2, 0, 3});
    CHECK(global_permutation_accuracy(tied, ordered) == 1.0);
    std::vector<double> empty;
    CHECK_THROWS_AS(global_permutation_accuracy(empty, empty), Error);
    std::vector<double> three{1, 2, 3};
    CHECK_THROWS_AS(global_permutation_accuracy(three, a), Error);
}

TEST_CASE("mixture: case 1 counts, centers on the circle, reproducible") {
    auto [sx, sy] = circle_case(1, 11);
    auto p = gen_circle_mixture_pair(sx, sy);
    CHECK(p.x.data.rows() == 360);
    CHECK(p.y.data.rows() == 360);
    for (std::size_t c = 0; c < 6; ++c) {
        CHECK(std::count(p.x.cluster.begin(), p.x.cluster.end(), c) == 60);
        CHECK(std::abs(p.x.centers.row(static_cast<Eigen::Index>(c)).norm() - 10.0) <= 1e-9);
        CHECK(std::abs(p.y.centers.row(static_cast<Eigen::Index>(c)).norm() - 20.0) <= 1e-9);
    }
    CHECK(std::is_sorted(p.angles.begin(), p.angles.end()));
    auto again = gen_circle_mixture_pair(sx, sy);
    CHECK(again.x.data.features() == p.x.data.features());
    CHECK(again.y.data.features() == p.y.data.features());
}

TEST_CASE("mixture: dirichlet proportions sum to one and match the counts") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto [sx, sy] = circle_case(2, seed);
        auto p = gen_circle_mixture_pair(sx, sy);
        CHECK(p.y.data.rows() == 360);
        const double sum = std::accumulate(p.y.proportions.begin(), p.y.proportions.end(), 0.0);
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        for (std::size_t c = 0; c < 6; ++c) {
            const double emp = static_cast<double>(std::count(p.y.cluster.begin(), p.y.cluster.end(), c)) / 360.0;
            CHECK(std::abs(emp - p.y.proportions[c]) <= 3.0 / std::sqrt(360.0));
        }
    }
}

TEST_CASE("mixture: invalid specs") {
    MixturePairSpec ok;
    auto bad = ok;
    bad.k = 0;
    CHECK_THROWS_AS(gen_circle_mixture_pair(bad, ok), Error);
    bad = ok;
    bad.radius = 0.0;
    CHECK_THROWS_AS(gen_circle_mixture_pair(ok, bad), Error);
    bad = ok;
    bad.proportions = ProportionMode::dirichlet;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(gen_circle_mixture_pair(ok, bad), Error);
    bad = ok;
    bad.k = 5;
    try {
        gen_circle_mixture_pair(ok, bad);
        FAIL("expected InvalidSpec");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidSpec);
    }
    CHECK_THROWS_AS(circle_case(3, 0), Error);
}

TEST_CASE("mixture: NSPD and NSDD against the ground truth") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto [sx, sy] = circle_case(1, seed);
        auto p = gen_circle_mixture_pair(sx, sy);
        auto st = neighbourhood_stats(center_prototypes(p.x.centers), p.x.data, p.y.data);
        for (const auto& n : st.prototypes) {
            CHECK(std::abs(n.nspd) <= 0.08);
            REQUIRE(n.nsdd.has_value());
            CHECK(*n.nsdd < 0.0);
        }
    }
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto [sx, sy] = circle_case(2, seed);
        auto p = gen_circle_mixture_pair(sx, sy);
        auto st = neighbourhood_stats(center_prototypes(p.x.centers), p.x.data, p.y.data);
        for (std::size_t c = 0; c < 6; ++c) {
            CHECK(std::abs(st.prototypes[c].nspd - (1.0 / 6.0 - p.y.proportions[c])) <= 3.0 / std::sqrt(360.0));
        }
    }
}

TEST_CASE("logistic sample: per-row streams make prefixes stable") {
    auto small = logistic_sample(50, 5, 9), big = logistic_sample(100, 5, 9);
    CHECK(big.x.topRows(50) == small.x);
    CHECK(std::equal(small.y.begin(), small.y.end(), big.y.begin()));
    auto same = logistic_sample(20, 3, 9, true);
    for (Eigen::Index i = 1; i < 20; ++i) CHECK(same.x.row(i) == same.x.row(0));
}

TEST_CASE("validate_influence: correlation on the 200-row task") {
    auto v = validate_influence(200, 5, 1e-2, 0);
    REQUIRE(v.pearson.has_value());
    CHECK(*v.pearson >= 0.95);
    CHECK(v.sign_agreement >= 0.95);
    CHECK_FALSE(v.degenerate);
}

TEST_CASE("validate_influence: identical rows are degenerate, small n is rejected") {
    auto v = validate_influence(20, 4, 1e-2, 3, true);
    CHECK(v.degenerate);
    CHECK_FALSE(v.pearson.has_value());
    CHECK_THROWS_AS(validate_influence(19, 4, 1e-2, 3), Error);
}

TEST_CASE("planted shift: culprit rows are recovered in the top 5%") {
    std::size_t hits = 0, planted = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto ps = planted_shift(seed);
        auto scheme = fit_binarizer(concat(ps.d, ps.d_prime), 8);
        InfluenceOptions o;
        o.ensemble.seed = seed;
        o.k = static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(ps.d_prime.rows())));
        auto r = top_k_influential(ps.d, ps.d_prime, scheme, o);
        for (auto i : r.selected) hits += ps.planted[i] != 0;
        planted += static_cast<std::size_t>(std::count(ps.planted.begin(), ps.planted.end(), 1));
        REQUIRE(r.alignment.has_value());
        CHECK(*r.alignment > 0.0);
    }
    CHECK(static_cast<double>(hits) >= 0.6 * static_cast<double>(planted));
}

TEST_CASE("planted shift: D' = D gives a chance-level discriminator and no gap") {
    auto ps = planted_shift(4);
    auto scheme = fit_binarizer(ps.d, 8);
    InfluenceOptions o;
    o.k = 20;
    auto r = top_k_influential(ps.d, ps.d, scheme, o);
    CHECK(std::abs(r.discriminator_accuracy - 0.5) <= 0.05);
    CHECK_FALSE(r.alignment.has_value());
    CHECK_FALSE(r.alignment_note.empty());
}

TEST_CASE("alignment sweep: rises, then falls before full removal") {
    const auto fractions = default_removal_fractions();
    std::vector<double> mean(fractions.size(), 0.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto ps = planted_shift(seed);
        auto scheme = fit_binarizer(concat(ps.d, ps.d_prime), 8);
        InfluenceOptions o;
        o.ensemble.seed = seed;
        auto sw = alignment_sweep(ps.d, ps.d_prime, scheme, o, fractions, &ps.planted);
        REQUIRE(sw.points.size() == fractions.size());
        CHECK(sw.points.back().removed == ps.d_prime.rows() - 1);
        for (std::size_t i = 0; i < fractions.size(); ++i) {
            REQUIRE(sw.points[i].alignment.has_value());
            mean[i] += *sw.points[i].alignment / 5.0;
        }
    }
    const auto best = static_cast<std::size_t>(std::max_element(mean.begin(), mean.end()) - mean.begin());
    CHECK(best + 1 < fractions.size());
    CHECK(mean[best] > 0.0);
}

TEST_CASE("faithfulness sweep: K = M is exact, scored beats random on variance") {
    CorpusContextOptions co;
    co.with_importance = false;
    double scored_var = 0, random_var = 0, rta_low = 0, rta_high = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto ctx = corpus_context(seed, co);
        FaithfulnessOptions fo;
        fo.seed = seed;
        auto sw = faithfulness_sweep(ctx, fo);
        const std::size_t m = ctx.d.cols();
        REQUIRE(sw.records.size() == 2 * m);
        for (const auto& r : sw.records) {
            if (r.k == m) {
                CHECK(r.rta == 1.0);
                CHECK(r.gpa == 1.0);
            }
            if (r.selection == "scored") {
                scored_var += r.variance;
                if (r.k == 1) rta_low += r.rta;
                if (r.k == m - 1) rta_high += r.rta;
            } else {
                random_var += r.variance;
            }
        }
    }
    CHECK(scored_var <= random_var);
    CHECK(rta_high >= rta_low);
}

TEST_CASE("faithfulness sweep: independent of the worker count") {
    CorpusContextOptions co;
    co.with_importance = false;
    auto ctx = corpus_context(2, co, Exec::serial);
    FaithfulnessOptions fo;
    fo.exec = Exec::serial;
    auto a = faithfulness_sweep(ctx, fo);
    set_num_workers(4);
    fo.exec = Exec::omp;
    auto b = faithfulness_sweep(ctx, fo);
    set_num_workers(1);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].rta == b.records[i].rta);
        CHECK(a.records[i].gpa == b.records[i].gpa);
        CHECK(a.records[i].variance == b.records[i].variance);
    }
}

TEST_CASE("tradeoff sweep: degenerate range, record layout, negative correlation") {
    auto ctx = corpus_context(0);
    TradeoffOptions flat;
    flat.n_samples = 10;
    flat.c_low = flat.c_high = 0.5;
    auto f = tradeoff_sweep(ctx, flat);
    REQUIRE(f.records.size() == 30);
    for (const auto& r : f.records) {
        const auto& first = f.records[r.k - 3];
        CHECK(r.rank_difference == first.rank_difference);
        CHECK(r.absolute_rank == first.absolute_rank);
        CHECK(r.value_deviation == first.value_deviation);
    }

    TradeoffOptions opts;
    auto sw = tradeoff_sweep(ctx, opts);
    CHECK(sw.records.size() == opts.n_samples * 3);
    for (const auto& r : sw.records) {
        CHECK(std::isfinite(r.rank_difference));
        CHECK(r.weights.c1 >= 1e-2);
        CHECK(r.weights.c1 <= 10.0);
    }
    auto corr = tradeoff_correlation(sw);
    REQUIRE(corr.has_value());
    CHECK(*corr < 0.0);

    TradeoffOptions none;
    none.n_samples = 0;
    CHECK_THROWS_AS(tradeoff_sweep(ctx, none), Error);
    CorpusContextOptions co;
    co.with_importance = false;
    CHECK_THROWS_AS(tradeoff_sweep(corpus_context(0, co), opts), Error);
}
