#include "driftscope/rashomon.hpp"

#include "driftscope/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace driftscope {

std::string_view to_string(ImportanceKind kind) {
    switch (kind) {
    case ImportanceKind::lfim: return "lfim";
    case ImportanceKind::lifim: return "lifim";
    case ImportanceKind::gifim: return "gifim";
    }
    return "unknown";
}

std::size_t RashomonEnsemble::member_count() const {
    std::size_t n = 0;
    for (const auto& b : bootstraps) n += b.members.size();
    return n;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed, std::size_t replicate) {
    std::mt19937_64 rng(mix_seed(seed, 0xb007, replicate));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> out(n);
    for (auto& r : out) r = pick(rng);
    return out;
}

namespace {

BootstrapReplicate fit_replicate(const TabularDataset& data, const EnsembleConfig& cfg, std::size_t b) {
    BootstrapReplicate rep;
    rep.sample = bootstrap_sample(data.rows(), cfg.seed, b);
    const auto boot = data.subset(rep.sample);
    std::vector<DecisionTree> candidates;
    std::vector<double> losses;
    for (std::size_t c = 0; c < cfg.candidates_per_bootstrap; ++c) {
        const double frac = c == 0 ? 1.0 : cfg.feature_subsample;
        auto tree = fit_greedy_tree(boot, cfg.depth, cfg.lambda, mix_seed(cfg.seed, b + 1, c + 1), frac);
        losses.push_back(tree.regularized_loss(boot));
        candidates.push_back(std::move(tree));
    }
    rep.candidates_fit = candidates.size();
    rep.best_loss = *std::min_element(losses.begin(), losses.end());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (losses[c] <= rep.best_loss + cfg.epsilon) {
            rep.members.push_back(std::move(candidates[c]));
            rep.member_losses.push_back(losses[c]);
        }
    }
    return rep;
}

} // namespace

RashomonEnsemble build_ensemble(const TabularDataset& binarized, const EnsembleConfig& config, Exec exec) {
    if (config.bootstraps < 1) fail(ErrorKind::InvalidArgument, "need at least one bootstrap");
    if (config.epsilon < 0.0) fail(ErrorKind::InvalidArgument, "epsilon must be >= 0");
    if (config.candidates_per_bootstrap < 1) fail(ErrorKind::InvalidArgument, "need at least one candidate per bootstrap");
    if (!binarized.has_labels()) fail(ErrorKind::UnlabeledDataset, "ensembles are fit against labels");
    if (binarized.empty()) fail(ErrorKind::EmptyDataset, "cannot bootstrap an empty dataset");

    RashomonEnsemble ens;
    ens.config = config;
    ens.n_features = binarized.cols();
    ens.feature_names = binarized.column_names();
    ens.bootstraps.resize(config.bootstraps);
    if (resolve(exec) == Exec::omp) {
        omp_for(static_cast<std::ptrdiff_t>(config.bootstraps), [&](std::ptrdiff_t b) {
            ens.bootstraps[static_cast<std::size_t>(b)] = fit_replicate(binarized, config, static_cast<std::size_t>(b));
        });
    } else {
        for (std::size_t b = 0; b < config.bootstraps; ++b) ens.bootstraps[b] = fit_replicate(binarized, config, b);
    }
    return ens;
}

RowMatrix select_background(const TabularDataset& data, std::size_t max_rows, std::uint64_t seed) {
    if (data.empty()) fail(ErrorKind::EmptyBackground, "background source has no rows");
    std::vector<std::size_t> ids(data.rows());
    std::iota(ids.begin(), ids.end(), 0);
    if (data.rows() > max_rows) {
        std::mt19937_64 rng(mix_seed(seed, 0xbac6));
        std::shuffle(ids.begin(), ids.end(), rng);
        ids.resize(max_rows);
        std::sort(ids.begin(), ids.end());
    }
    return data.subset(ids).features();
}

ImportanceVector lfim_tree_shapley(const DecisionTree& tree, std::span<const double> x, const Background& background,
                                   ShapleyAlgorithm algorithm) {
    ImportanceVector out;
    out.values = tree_shapley(tree, x, background, algorithm);
    out.kind = ImportanceKind::lfim;
    out.subject = "example";
    return out;
}

std::vector<double> lifim(const RashomonEnsemble& ensemble, std::span<const double> x, const Background& background,
                          ShapleyAlgorithm algorithm) {
    if (ensemble.bootstraps.empty()) fail(ErrorKind::InvalidArgument, "empty ensemble");
    std::vector<double> out(ensemble.n_features, 0.0);
    const double per_boot = 1.0 / static_cast<double>(ensemble.bootstraps.size());
    for (const auto& rep : ensemble.bootstraps) {
        std::vector<double> acc(ensemble.n_features, 0.0);
        for (const auto& tree : rep.members) {
            auto phi = tree_shapley(tree, x, background, algorithm);
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += phi[j];
        }
        const double per_member = per_boot / static_cast<double>(rep.members.size());
        for (std::size_t j = 0; j < acc.size(); ++j) out[j] += acc[j] * per_member;
    }
    return out;
}

namespace {

struct UniqueRows {
    std::vector<std::size_t> first; // representative row of each unique pattern
    std::vector<std::size_t> of;    // unique id of every row
};

UniqueRows unique_rows(const RowMatrix& rows) {
    UniqueRows u;
    u.of.resize(static_cast<std::size_t>(rows.rows()));
    std::map<std::vector<double>, std::size_t> seen;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        std::vector<double> key(rows.data() + i * rows.cols(), rows.data() + (i + 1) * rows.cols());
        auto [it, inserted] = seen.emplace(std::move(key), u.first.size());
        if (inserted) u.first.push_back(static_cast<std::size_t>(i));
        u.of[static_cast<std::size_t>(i)] = it->second;
    }
    return u;
}

RowMatrix scatter(const RowMatrix& unique_values, const UniqueRows& u, Eigen::Index rows) {
    RowMatrix out(rows, unique_values.cols());
    for (Eigen::Index i = 0; i < rows; ++i) out.row(i) = unique_values.row(static_cast<Eigen::Index>(u.of[static_cast<std::size_t>(i)]));
    return out;
}

void check_batch(const RashomonEnsemble& ensemble, const RowMatrix& rows) {
    if (static_cast<std::size_t>(rows.cols()) != ensemble.n_features) {
        fail(ErrorKind::DimensionMismatch, fmt::format("rows have {} features, ensemble {}", rows.cols(), ensemble.n_features));
    }
}

} // namespace

RowMatrix lifim_batch_serial(const RashomonEnsemble& ensemble, const RowMatrix& rows, const Background& background,
                             ShapleyAlgorithm algorithm) {
    check_batch(ensemble, rows);
    const auto u = unique_rows(rows);
    RowMatrix values(static_cast<Eigen::Index>(u.first.size()), static_cast<Eigen::Index>(ensemble.n_features));
    for (std::size_t k = 0; k < u.first.size(); ++k) {
        auto phi = lifim(ensemble, {rows.data() + u.first[k] * ensemble.n_features, ensemble.n_features}, background, algorithm);
        for (std::size_t j = 0; j < phi.size(); ++j) values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = phi[j];
    }
    return scatter(values, u, rows.rows());
}

RowMatrix lifim_batch_omp(const RashomonEnsemble& ensemble, const RowMatrix& rows, const Background& background,
                          ShapleyAlgorithm algorithm) {
    check_batch(ensemble, rows);
    const auto u = unique_rows(rows);
    RowMatrix values(static_cast<Eigen::Index>(u.first.size()), static_cast<Eigen::Index>(ensemble.n_features));
    omp_for(static_cast<std::ptrdiff_t>(u.first.size()), [&](std::ptrdiff_t k) {
        auto phi = lifim(ensemble, {rows.data() + u.first[static_cast<std::size_t>(k)] * ensemble.n_features, ensemble.n_features},
                         background, algorithm);
        for (std::size_t j = 0; j < phi.size(); ++j) values(k, static_cast<Eigen::Index>(j)) = phi[j];
    });
    return scatter(values, u, rows.rows());
}

RowMatrix lifim_batch(const RashomonEnsemble& ensemble, const RowMatrix& rows, const Background& background,
                      ShapleyAlgorithm algorithm, Exec exec) {
    return resolve(exec) == Exec::omp ? lifim_batch_omp(ensemble, rows, background, algorithm)
                                      : lifim_batch_serial(ensemble, rows, background, algorithm);
}

std::vector<double> column_mean(const RowMatrix& m) {
    if (m.rows() == 0) fail(ErrorKind::EmptyDataset, "mean over zero rows");
    std::vector<double> out(static_cast<std::size_t>(m.cols()), 0.0);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(j)] += m(i, j);
    }
    for (auto& v : out) v /= static_cast<double>(m.rows());
    return out;
}

ImportanceVector gifim(const RashomonEnsemble& ensemble, const TabularDataset& binarized, const Background& background,
                       std::string subject, ShapleyAlgorithm algorithm, Exec exec) {
    if (binarized.empty()) fail(ErrorKind::EmptyDataset, "GiFIM of an empty dataset");
    ImportanceVector out;
    out.values = column_mean(lifim_batch(ensemble, binarized.features(), background, algorithm, exec));
    out.kind = ImportanceKind::gifim;
    out.subject = std::move(subject);
    out.feature_names = ensemble.feature_names;
    return out;
}

IntrinsicImportance IntrinsicImportance::fit(const TabularDataset& raw, const BinarizationScheme& scheme,
                                             const EnsembleConfig& config, std::size_t background_rows, Exec exec,
                                             const TabularDataset* reference) {
    IntrinsicImportance imp;
    imp.scheme = scheme;
    auto bin = scheme.apply(raw);
    imp.ensemble = build_ensemble(bin, config, exec);
    const auto bg_source = reference ? scheme.apply(*reference) : bin;
    imp.background = Background(select_background(bg_source, background_rows, config.seed));
    return imp;
}

std::vector<double> IntrinsicImportance::local(std::span<const double> raw_row) const {
    auto b = scheme.apply(raw_row);
    return lifim(ensemble, b, background, algorithm);
}

std::vector<double> IntrinsicImportance::local_source(std::span<const double> raw_row) const {
    return scheme.to_source(local(raw_row));
}

RowMatrix IntrinsicImportance::batch(const TabularDataset& raw, Exec exec) const {
    return lifim_batch(ensemble, scheme.apply(raw).features(), background, algorithm, exec);
}

RowMatrix IntrinsicImportance::batch_source(const TabularDataset& raw, Exec exec) const {
    const RowMatrix derived = batch(raw, exec);
    RowMatrix out(derived.rows(), static_cast<Eigen::Index>(raw.cols()));
    for (Eigen::Index i = 0; i < derived.rows(); ++i) {
        auto v = scheme.to_source(std::span<const double>(derived.row(i).data(), static_cast<std::size_t>(derived.cols())));
        out.row(i) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    return out;
}

} // namespace driftscope
