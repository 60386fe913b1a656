#include "driftscope/sweeps.hpp"

#include "driftscope/binarize.hpp"
#include "driftscope/error.hpp"
#include "driftscope/metrics.hpp"
#include "driftscope/normalize.hpp"
#include "driftscope/stats.hpp"
#include "driftscope/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace driftscope {

LifimProvider make_lifim_provider(std::shared_ptr<const IntrinsicImportance> d,
                                  std::shared_ptr<const IntrinsicImportance> d_prime) {
    return [d, d_prime](std::span<const double> row, Side side) {
        return (side == Side::d ? *d : *d_prime).local_source(row);
    };
}

PrototypeContext make_prototype_context(TabularDataset d, TabularDataset d_prime, std::vector<Prototype> prototypes,
                                        const PartialOptions& options, const LifimProvider* provider) {
    if (prototypes.empty()) fail(ErrorKind::EmptyPrototypeSet, "no prototypes to sweep over");
    PrototypeContext ctx;
    ctx.options = options;
    ctx.scorings.resize(prototypes.size());
    auto one = [&](std::size_t p) { ctx.scorings[p] = prepare_scoring(prototypes[p], d, d_prime, options, provider); };
    if (resolve(options.neighbourhood.exec) == Exec::omp) {
        omp_for(static_cast<std::ptrdiff_t>(prototypes.size()), [&](std::ptrdiff_t p) { one(static_cast<std::size_t>(p)); });
    } else {
        for (std::size_t p = 0; p < prototypes.size(); ++p) one(p);
    }
    ctx.d = std::move(d);
    ctx.d_prime = std::move(d_prime);
    ctx.prototypes = std::move(prototypes);
    return ctx;
}

PrototypeContext corpus_context(std::uint64_t seed, const CorpusContextOptions& options, Exec exec) {
    auto corpus = synthetic_corpus(seed, options.rows);
    auto stats = fit_normalizer(corpus.d);
    auto d = apply_normalizer(stats, corpus.d);
    auto dp = apply_normalizer(stats, corpus.d_prime);
    auto prototypes = kmeans_prototypes(d, options.prototypes, seed, 300, exec);
    PartialOptions partial;
    partial.neighbourhood.exec = exec;
    if (!options.with_importance) {
        partial.weights = {0.0, 0.0, 1.0};
        return make_prototype_context(std::move(d), std::move(dp), std::move(prototypes), partial, nullptr);
    }

    auto scheme = fit_binarizer(concat(d, dp), options.thresholds_per_column);
    EnsembleConfig config = options.ensemble;
    config.seed = mix_seed(seed, config.seed);
    auto imp_d = std::make_shared<const IntrinsicImportance>(
        IntrinsicImportance::fit(d, scheme, config, options.background_rows, exec, &d));
    auto imp_dp = std::make_shared<const IntrinsicImportance>(
        IntrinsicImportance::fit(dp, scheme, config, options.background_rows, exec, &d));
    auto provider = make_lifim_provider(imp_d, imp_dp);
    return make_prototype_context(std::move(d), std::move(dp), std::move(prototypes), partial, &provider);
}

namespace {

template <class Body>
void grid_for(Exec exec, std::size_t n, Body&& body) {
    if (resolve(exec) == Exec::omp) {
        omp_for(static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t i) { body(static_cast<std::size_t>(i)); });
    } else {
        for (std::size_t i = 0; i < n; ++i) body(i);
    }
}

// Distances over the given features (ascending order) for every neighbour.
std::vector<double> restricted_distances(const PrototypeScoring& s, const std::vector<std::size_t>& features) {
    std::vector<double> out;
    out.reserve(s.rows_d.size() + s.rows_dp.size());
    for (const RowMatrix* diff : {&s.diff_d, &s.diff_dp}) {
        for (Eigen::Index r = 0; r < diff->rows(); ++r) {
            double acc = 0.0;
            for (auto j : features) {
                const double v = (*diff)(r, static_cast<Eigen::Index>(j));
                acc += v * v;
            }
            out.push_back(std::sqrt(acc));
        }
    }
    return out;
}

double neighbourhood_variance(const PrototypeContext& ctx, const PrototypeScoring& s,
                              const std::vector<std::size_t>& features) {
    double total = 0.0;
    for (auto j : features) {
        std::vector<double> values;
        for (auto r : s.rows_d) values.push_back(ctx.d.at(r, j));
        for (auto r : s.rows_dp) values.push_back(ctx.d_prime.at(r, j));
        total += stats::variance(values);
    }
    return total / static_cast<double>(features.size());
}

struct Faithfulness {
    double rta = 0.0, gpa = 0.0, variance = 0.0;
};

Faithfulness evaluate(const PrototypeContext& ctx, const PrototypeScoring& s, std::vector<std::size_t> features,
                      std::size_t n_trials, std::uint64_t seed) {
    std::sort(features.begin(), features.end());
    std::vector<std::size_t> all(s.width());
    std::iota(all.begin(), all.end(), 0);
    const auto full = restricted_distances(s, all);
    const auto partial = restricted_distances(s, features);
    return {random_triplet_accuracy(full, partial, n_trials, seed), global_permutation_accuracy(full, partial),
            neighbourhood_variance(ctx, s, features)};
}

std::vector<std::size_t> random_subset(std::size_t m, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> all(m);
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, m - 1);
        std::swap(all[i], all[pick(rng)]);
    }
    all.resize(k);
    return all;
}

} // namespace

FaithfulnessSweep faithfulness_sweep(const PrototypeContext& ctx, const FaithfulnessOptions& options) {
    if (ctx.scorings.empty()) fail(ErrorKind::EmptyPrototypeSet, "no prototypes to sweep over");
    const std::size_t m = ctx.scorings.front().width();
    FaithfulnessSweep out;
    out.options = options;
    if (out.options.ks.empty()) {
        for (std::size_t k = 1; k <= m; ++k) out.options.ks.push_back(k);
    }
    for (auto k : out.options.ks) {
        if (k < 1 || k > m) fail(ErrorKind::InvalidArgument, fmt::format("K = {} is outside 1..{}", k, m));
    }
    if (options.random_seeds == 0) fail(ErrorKind::InvalidArgument, "random_seeds must be positive");

    std::vector<std::size_t> usable;
    for (std::size_t p = 0; p < ctx.scorings.size(); ++p) {
        if (ctx.scorings[p].rows_d.size() + ctx.scorings[p].rows_dp.size() >= 3) usable.push_back(p);
    }
    if (usable.empty()) fail(ErrorKind::TooFewItems, "no prototype has three or more neighbours");

    const auto& ks = out.options.ks;
    out.records.resize(2 * ks.size());
    grid_for(options.exec, ks.size(), [&](std::size_t g) {
        const std::size_t k = ks[g];
        FaithfulnessRecord scored{k, "scored", 0, 0, 0, usable.size(), 1};
        FaithfulnessRecord random{k, "random", 0, 0, 0, usable.size(), options.random_seeds};
        for (auto p : usable) {
            const auto& s = ctx.scorings[p];
            auto chosen = select_partial(s, k, options.weights).indices;
            auto f = evaluate(ctx, s, chosen, options.n_trials, mix_seed(options.seed, p, k));
            scored.rta += f.rta;
            scored.gpa += f.gpa;
            scored.variance += f.variance;
            for (std::size_t r = 0; r < options.random_seeds; ++r) {
                const auto stream = mix_seed(options.seed, p, (k << 20) + r + 1);
                auto fr = evaluate(ctx, s, random_subset(m, k, stream), options.n_trials, mix_seed(stream, 1));
                random.rta += fr.rta;
                random.gpa += fr.gpa;
                random.variance += fr.variance;
            }
        }
        const double np = static_cast<double>(usable.size());
        const double nr = np * static_cast<double>(options.random_seeds);
        scored.rta /= np;
        scored.gpa /= np;
        scored.variance /= np;
        random.rta /= nr;
        random.gpa /= nr;
        random.variance /= nr;
        out.records[2 * g] = scored;
        out.records[2 * g + 1] = random;
    });
    return out;
}

TradeoffSweep tradeoff_sweep(const PrototypeContext& ctx, const TradeoffOptions& options) {
    if (options.n_samples < 1) fail(ErrorKind::InvalidArgument, "n_samples must be at least 1");
    if (!(options.c_low > 0.0 && options.c_high >= options.c_low)) {
        fail(ErrorKind::InvalidArgument, "the c range must satisfy 0 < low <= high");
    }
    if (ctx.scorings.empty()) fail(ErrorKind::EmptyPrototypeSet, "no prototypes to sweep over");
    for (const auto& s : ctx.scorings) {
        if (!s.has_ranks) fail(ErrorKind::InvalidArgument, "the tradeoff sweep needs importance ranks");
    }
    const std::size_t m = ctx.scorings.front().width();
    for (auto k : options.ks) {
        if (k < 1 || k > m) fail(ErrorKind::InvalidArgument, fmt::format("K = {} is outside 1..{}", k, m));
    }
    std::vector<PrototypeScoring::Components> comps;
    for (const auto& s : ctx.scorings) comps.push_back(s.components());

    TradeoffSweep out;
    out.options = options;
    out.records.resize(options.n_samples * options.ks.size());
    const double lo = std::log(options.c_low), hi = std::log(options.c_high);
    grid_for(options.exec, options.n_samples, [&](std::size_t sample) {
        std::mt19937_64 rng(mix_seed(options.seed, sample));
        std::uniform_real_distribution<double> u(lo, hi);
        ScoreWeights c;
        c.c1 = std::exp(u(rng));
        c.c2 = std::exp(u(rng));
        c.c3 = std::exp(u(rng));
        if (lo == hi) c = {options.c_low, options.c_low, options.c_low};
        for (std::size_t g = 0; g < options.ks.size(); ++g) {
            TradeoffRecord rec{sample, c, options.ks[g], 0, 0, 0};
            for (std::size_t p = 0; p < ctx.scorings.size(); ++p) {
                auto chosen = select_partial(ctx.scorings[p], rec.k, c).indices;
                double rd = 0, ar = 0, vd = 0;
                for (auto j : chosen) {
                    rd += comps[p].rank_difference[j];
                    ar += comps[p].absolute_rank[j];
                    vd += comps[p].value_deviation[j];
                }
                const double kk = static_cast<double>(chosen.size());
                rec.rank_difference += rd / kk;
                rec.absolute_rank += ar / kk;
                rec.value_deviation += vd / kk;
            }
            const double np = static_cast<double>(ctx.scorings.size());
            rec.rank_difference /= np;
            rec.absolute_rank /= np;
            rec.value_deviation /= np;
            out.records[sample * options.ks.size() + g] = rec;
        }
    });
    return out;
}

std::optional<double> tradeoff_correlation(const TradeoffSweep& sweep, std::optional<std::size_t> k) {
    std::vector<double> ar, rd;
    for (const auto& r : sweep.records) {
        if (k && r.k != *k) continue;
        ar.push_back(r.absolute_rank);
        rd.push_back(r.rank_difference);
    }
    if (ar.size() < 2) return std::nullopt;
    return stats::pearson(ar, rd);
}

std::vector<double> default_removal_fractions() {
    return {0.01, 0.025, 0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
}

AlignmentSweep alignment_sweep(const TabularDataset& d, const TabularDataset& d_prime, const BinarizationScheme& scheme,
                               const InfluenceOptions& options, const std::vector<double>& fractions,
                               const std::vector<char>* planted) {
    if (d.empty() || d_prime.empty()) fail(ErrorKind::EmptyDataset, "both datasets need rows");
    if (d_prime.rows() < 2) fail(ErrorKind::TooFewRows, "D' needs at least two rows to remove any");
    if (planted && planted->size() != d_prime.rows()) fail(ErrorKind::DimensionMismatch, "one planted flag per D' row");
    for (double f : fractions) {
        if (!(f > 0.0 && f <= 1.0)) fail(ErrorKind::InvalidArgument, fmt::format("removal fraction {} is outside (0, 1]", f));
    }
    auto imp_d = IntrinsicImportance::fit(d, scheme, options.ensemble, options.background_rows, options.exec, &d);
    auto imp_dp = IntrinsicImportance::fit(d_prime, scheme, options.ensemble, options.background_rows, options.exec, &d);
    const RowMatrix lifim_d = imp_d.batch_source(d, options.exec);
    const RowMatrix lifim_dp = imp_dp.batch_source(d_prime, options.exec);
    auto mi = membership_influence(lifim_d, lifim_dp, options.logistic, options.exec);
    const auto g_d = column_mean(lifim_d), g_dp = column_mean(lifim_dp);

    AlignmentSweep out;
    out.discriminator_accuracy = mi.accuracy;
    out.scores_dp = mi.scores_dp;
    const std::size_t np = d_prime.rows();
    const auto order = top_k(mi.scores_dp, np);
    for (double f : fractions) {
        AlignmentPoint pt;
        pt.fraction = f;
        pt.removed = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(f * static_cast<double>(np))), 1, np - 1);
        std::vector<char> gone(np, 0);
        for (std::size_t i = 0; i < pt.removed; ++i) {
            gone[order[i]] = 1;
            if (planted) pt.planted_removed += (*planted)[order[i]] != 0;
        }
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < np; ++i) {
            if (!gone[i]) rest.push_back(i);
        }
        auto rest_data = d_prime.subset(rest);
        auto imp = IntrinsicImportance::fit(rest_data, scheme, options.ensemble, options.background_rows, options.exec, &d);
        const auto g_rest = column_mean(imp.batch_source(rest_data, options.exec));
        try {
            pt.alignment = alignment(g_d, g_dp, g_rest);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::IdenticalGifims) throw;
        }
        out.points.push_back(pt);
    }
    return out;
}

InfluenceValidation validate_influence(std::size_t n, std::size_t m, double l2, std::uint64_t seed, bool identical_rows,
                                       Exec exec) {
    if (n < 20) fail(ErrorKind::InvalidArgument, fmt::format("validation needs n >= 20, got {}", n));
    InfluenceValidation v;
    v.n = n;
    v.m = m;
    v.l2 = l2;
    v.seed = seed;
    v.identical_rows = identical_rows;
    auto train = logistic_sample(n, m, seed, identical_rows);
    auto test = logistic_sample(n, m, mix_seed(seed, 0x7e57), identical_rows);
    LogisticOptions opts;
    opts.l2 = l2;
    auto model = fit_logistic(train.x, train.y, opts);
    v.scores = influence_scores(model, train.x, train.y, test.x, test.y, exec);
    v.oracle = loo_retrain_oracle(train.x, train.y, test.x, test.y, opts, exec);
    v.pearson = stats::pearson(v.scores, v.oracle);
    v.degenerate = !v.pearson.has_value();
    std::size_t agree = 0;
    for (std::size_t i = 0; i < n; ++i) {
        agree += (v.scores[i] > 0) - (v.scores[i] < 0) == (v.oracle[i] > 0) - (v.oracle[i] < 0);
    }
    v.sign_agreement = static_cast<double>(agree) / static_cast<double>(n);
    return v;
}

} // namespace driftscope
