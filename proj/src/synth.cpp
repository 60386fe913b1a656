#include "driftscope/synth.hpp"

#include "driftscope/error.hpp"
#include "driftscope/rashomon.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace driftscope {

std::pair<MixturePairSpec, MixturePairSpec> circle_case(int which, std::uint64_t seed) {
    if (which != 1 && which != 2) fail(ErrorKind::InvalidSpec, fmt::format("unknown mixture case {}", which));
    MixturePairSpec x;
    x.radius = 10.0;
    x.seed = seed;
    MixturePairSpec y = x;
    y.radius = 20.0;
    y.seed = mix_seed(seed, 0x5e11);
    if (which == 2) y.proportions = ProportionMode::dirichlet;
    return {x, y};
}

namespace {

void validate(const MixturePairSpec& s, const char* side) {
    auto bad = [&](const std::string& what) { fail(ErrorKind::InvalidSpec, fmt::format("mixture spec {}: {}", side, what)); };
    if (s.k < 1) bad("k must be at least 1");
    if (!(s.radius > 0.0)) bad("radius must be positive");
    if (!(s.std >= 0.0)) bad("std must be non-negative");
    if (s.proportions == ProportionMode::equal && s.per_cluster < 1) bad("per_cluster must be positive");
    if (s.proportions == ProportionMode::dirichlet) {
        if (s.total < 1) bad("total must be positive");
        if (!(s.alpha > 0.0)) bad("alpha must be positive");
    }
}

MixtureSample draw(const MixturePairSpec& s, const std::vector<double>& angles) {
    std::mt19937_64 rng(s.seed);
    MixtureSample out;
    out.centers.resize(static_cast<Eigen::Index>(s.k), 2);
    for (std::size_t c = 0; c < s.k; ++c) {
        out.centers(static_cast<Eigen::Index>(c), 0) = s.radius * std::cos(angles[c]);
        out.centers(static_cast<Eigen::Index>(c), 1) = s.radius * std::sin(angles[c]);
    }
    if (s.proportions == ProportionMode::equal) {
        out.proportions.assign(s.k, 1.0 / static_cast<double>(s.k));
        for (std::size_t c = 0; c < s.k; ++c) out.cluster.insert(out.cluster.end(), s.per_cluster, c);
    } else {
        std::gamma_distribution<double> gamma(s.alpha, 1.0);
        double sum = 0.0;
        for (std::size_t c = 0; c < s.k; ++c) {
            out.proportions.push_back(gamma(rng));
            sum += out.proportions.back();
        }
        for (auto& p : out.proportions) p /= sum;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (std::size_t i = 0; i < s.total; ++i) {
            double r = u(rng), acc = 0.0;
            std::size_t c = 0;
            for (; c + 1 < s.k; ++c) {
                acc += out.proportions[c];
                if (r < acc) break;
            }
            out.cluster.push_back(c);
        }
    }
    std::normal_distribution<double> g(0.0, 1.0);
    RowMatrix x(static_cast<Eigen::Index>(out.cluster.size()), 2);
    for (std::size_t i = 0; i < out.cluster.size(); ++i) {
        const auto c = static_cast<Eigen::Index>(out.cluster[i]);
        x(static_cast<Eigen::Index>(i), 0) = out.centers(c, 0) + s.std * g(rng);
        x(static_cast<Eigen::Index>(i), 1) = out.centers(c, 1) + s.std * g(rng);
    }
    out.data = TabularDataset::from_matrix(std::move(x), {"x1", "x2"});
    return out;
}

} // namespace

MixturePair gen_circle_mixture_pair(const MixturePairSpec& spec_x, const MixturePairSpec& spec_y) {
    validate(spec_x, "x");
    validate(spec_y, "y");
    if (spec_x.k != spec_y.k) fail(ErrorKind::InvalidSpec, "paired mixtures need the same k");
    MixturePair out;
    std::mt19937_64 rng(mix_seed(spec_x.seed, 0xa9));
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (std::size_t c = 0; c < spec_x.k; ++c) out.angles.push_back(angle(rng));
    std::sort(out.angles.begin(), out.angles.end());
    out.x = draw(spec_x, out.angles);
    out.y = draw(spec_y, out.angles);
    return out;
}

TabularPair synthetic_corpus(std::uint64_t seed, std::size_t n) {
    auto make = [&](std::uint64_t s, bool shifted) {
        std::mt19937_64 rng(s);
        std::normal_distribution<double> g(0.0, 1.0);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        std::bernoulli_distribution flag(shifted ? 0.45 : 0.3), side(0.5);
        RowMatrix x(static_cast<Eigen::Index>(n), 8);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            x(r, 0) = g(rng);
            x(r, 1) = g(rng) + (shifted ? 0.8 : 0.0);
            x(r, 2) = (side(rng) ? 2.0 : -2.0) + 0.3 * g(rng);
            x(r, 3) = flag(rng) ? 1.0 : 0.0;
            x(r, 4) = u(rng);
            x(r, 5) = 3.0 * g(rng);
            x(r, 6) = g(rng) + (shifted ? 0.5 : 0.0);
            x(r, 7) = 0.5 * g(rng) + 0.5 * x(r, 0);
            const double z = 1.5 * x(r, 0) + 0.5 * x(r, 2) + 1.2 * x(r, 3) - 0.4 + 0.5 * g(rng);
            y[i] = z > 0.0 ? 1 : 0;
        }
        return TabularDataset::from_matrix(std::move(x), {"g0", "g1", "bimodal", "flag", "uniform", "wide", "g6", "g7"},
                                           std::move(y));
    };
    return {make(mix_seed(seed, 1), false), make(mix_seed(seed, 2), true)};
}

PlantedShift planted_shift(std::uint64_t seed, std::size_t n, double planted_fraction) {
    if (!(planted_fraction >= 0.0 && planted_fraction < 1.0)) fail(ErrorKind::InvalidSpec, "planted fraction must be in [0, 1)");
    const auto n_planted = static_cast<std::size_t>(std::ceil(planted_fraction * static_cast<double>(n)));
    std::mt19937_64 rng(mix_seed(seed, 0x91a));
    std::normal_distribution<double> g(0.0, 1.0);
    const std::size_t m = 6;
    RowMatrix base(static_cast<Eigen::Index>(n), m);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j + 1 < m; ++j) base(r, static_cast<Eigen::Index>(j)) = g(rng);
        base(r, m - 1) = 0.0;
        y[i] = base(r, 0) + 0.5 * base(r, 1) + 0.5 * g(rng) > 0.0 ? 1 : 0;
    }
    RowMatrix dp(static_cast<Eigen::Index>(n + n_planted), m);
    dp.topRows(static_cast<Eigen::Index>(n)) = base;
    std::vector<int> yp = y;
    PlantedShift out;
    out.planted.assign(n + n_planted, 0);
    for (std::size_t i = 0; i < n_planted; ++i) {
        const auto r = static_cast<Eigen::Index>(n + i);
        for (std::size_t j = 0; j + 1 < m; ++j) dp(r, static_cast<Eigen::Index>(j)) = g(rng);
        // Placed where the base rule predicts 0, so only the flag explains the label.
        dp(r, 0) = -0.5 - std::abs(dp(r, 0));
        dp(r, m - 1) = 1.0;
        yp.push_back(1);
        out.planted[n + i] = 1;
    }
    std::vector<std::string> names{"a", "b", "c", "d", "e", "flag"};
    std::vector<ColumnMeta> meta;
    for (std::size_t j = 0; j < m; ++j) meta.push_back({names[j], j + 1 == m ? ColumnKind::binary : ColumnKind::continuous});
    out.d = TabularDataset(std::move(base), meta, std::move(y));
    out.d_prime = TabularDataset(std::move(dp), meta, std::move(yp));
    return out;
}

LogisticSample logistic_sample(std::size_t n, std::size_t m, std::uint64_t seed, bool identical) {
    LogisticSample out{RowMatrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)), std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        std::mt19937_64 rng(mix_seed(seed, 0x10, identical ? 0 : i));
        std::normal_distribution<double> g(0.0, 1.0);
        const int label = static_cast<int>(i % 2);
        out.y[i] = label;
        const double shift = identical ? 0.0 : (label ? 0.5 : -0.5);
        for (std::size_t j = 0; j < m; ++j) {
            out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g(rng) + shift / static_cast<double>(j + 1);
        }
    }
    return out;
}

} // namespace driftscope
