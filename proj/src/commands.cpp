#include "driftscope/report.hpp"

#include "driftscope/attributes.hpp"
#include "driftscope/binarize.hpp"
#include "driftscope/embedding.hpp"
#include "driftscope/influence.hpp"
#include "driftscope/neighbourhood.hpp"
#include "driftscope/normalize.hpp"
#include "driftscope/partial.hpp"
#include "driftscope/prototypes.hpp"
#include "driftscope/serialize.hpp"
#include "driftscope/stats.hpp"
#include "driftscope/sweeps.hpp"
#include "driftscope/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace driftscope {

namespace {

// Collects the artifacts of one run; report.json and report.md are added last.
struct Output {
    std::filesystem::path dir;
    std::set<std::string> files;

    void write(const std::string& name, const std::string& text) {
        write_text(dir / name, text);
        files.insert(name);
    }
};

std::uint64_t u64(const nlohmann::json& c, const char* key) { return c.at(key).get<std::uint64_t>(); }
std::size_t size(const nlohmann::json& c, const char* key) { return static_cast<std::size_t>(u64(c, key)); }
double real(const nlohmann::json& c, const char* key) { return c.at(key).get<double>(); }
std::string text(const nlohmann::json& c, const char* key) { return c.at(key).get<std::string>(); }

EnsembleConfig ensemble_config(const nlohmann::json& c, std::uint64_t seed) {
    EnsembleConfig e;
    e.bootstraps = size(c, "bootstraps");
    e.epsilon = real(c, "epsilon");
    e.depth = static_cast<int>(u64(c, "depth"));
    e.lambda = real(c, "lambda");
    e.candidates_per_bootstrap = size(c, "candidates_per_bootstrap");
    e.feature_subsample = real(c, "feature_subsample");
    e.seed = seed;
    return e;
}

nlohmann::json dataset_json(const std::string& name, const std::string& path, const TabularDataset& data) {
    return {{"name", name}, {"path", path}, {"rows", data.rows()}, {"columns", data.column_names()}, {"labelled", data.has_labels()}};
}

void same_schema(const TabularDataset& d, const TabularDataset& dp) {
    if (d.column_names() != dp.column_names())
        fail(ErrorKind::SchemaMismatch, "D and D' must have the same feature columns in the same order");
}

// Prototype points from a CSV whose columns include every feature name; an
// optional "label" column becomes the prototype label.
std::vector<Prototype> load_prototype_file(const std::string& path, const std::vector<std::string>& names) {
    const auto raw = load_csv(path);
    RowMatrix points(static_cast<Eigen::Index>(raw.rows()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto idx = raw.column_index(names[j]);
        if (!idx) fail(ErrorKind::MissingColumn, fmt::format("prototype file {} has no column '{}'", path, names[j]));
        for (std::size_t i = 0; i < raw.rows(); ++i) points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = raw.at(i, *idx);
    }
    std::optional<std::vector<int>> labels;
    if (auto li = raw.column_index("label")) {
        labels.emplace();
        for (std::size_t i = 0; i < raw.rows(); ++i) {
            const double v = raw.at(i, *li);
            if (v != 0.0 && v != 1.0) fail(ErrorKind::ParseError, fmt::format("prototype file {}: label must be 0 or 1", path));
            labels->push_back(static_cast<int>(v));
        }
    }
    if (raw.rows() == 0) fail(ErrorKind::EmptyPrototypeSet, fmt::format("prototype file {} has no rows", path));
    return manual_prototypes(points, labels);
}

struct Run {
    nlohmann::json results = nlohmann::json::object();
    nlohmann::json seeds = nlohmann::json::object();
    nlohmann::json notes = nlohmann::json::array();
    std::string status = "ok";
};

Run run_prototypes(const nlohmann::json& c, Output& out) {
    Run run;
    const std::string label = text(c, "label");
    const std::optional<std::string> label_col = label.empty() ? std::nullopt : std::optional(label);
    const auto d_raw = load_csv(text(c, "d"), label_col);
    const auto dp_raw = load_csv(text(c, "d_prime"), label_col);
    same_schema(d_raw, dp_raw);
    const auto names = d_raw.column_names();
    const bool normalize = c.at("normalize").get<bool>();
    const auto stats = fit_normalizer(d_raw, text(c, "d_name"));
    const auto d = normalize ? apply_normalizer(stats, d_raw) : d_raw;
    const auto dp = normalize ? apply_normalizer(stats, dp_raw) : dp_raw;
    const std::uint64_t seed = u64(c, "seed");
    run.seeds["seed"] = seed;

    const auto method = text(c, "method");
    std::vector<Prototype> protos;
    if (method == "kmeans") {
        protos = kmeans_prototypes(d, size(c, "k"), seed);
        run.seeds["kmeans"] = seed;
    } else if (method == "grid") {
        const auto cols = c.at("grid_columns").get<std::vector<std::string>>();
        protos = percentile_grid_prototypes(d, {cols[0], cols[1]}, c.at("percentiles").get<std::vector<double>>(),
                                            static_cast<int>(u64(c, "grid_tree_depth")));
    } else {
        protos = load_prototype_file(text(c, "prototypes_file"), names);
        if (normalize)
            for (auto& p : protos) stats.apply_inplace(p.features);
    }
    const std::size_t m = names.size();
    if (size(c, "partial_k") > m)
        fail(ErrorKind::ConfigError, fmt::format("partial_k = {} exceeds the {} features", size(c, "partial_k"), m));

    NeighbourhoodOptions nopt;
    nopt.metric = parse_metric(text(c, "metric"));
    nopt.label_aware = c.at("label_aware").get<bool>();
    const auto nstats = neighbourhood_stats(protos, d, dp, nopt);

    PartialOptions popt;
    popt.k = size(c, "partial_k");
    popt.weights = {real(c, "c1"), real(c, "c2"), real(c, "c3")};
    popt.delta = real(c, "delta_radius") > 0.0 ? Delta::radius(real(c, "delta_radius")) : Delta::percentile(real(c, "delta_percentile"));
    popt.delta_per_side = c.at("delta_per_side").get<bool>();
    popt.neighbourhood = nopt;
    std::optional<LifimProvider> provider;
    nlohmann::json importance = {{"used", false}};
    if (popt.weights.c1 > 0.0 || popt.weights.c2 > 0.0) {
        const auto scheme = fit_binarizer(concat(d, dp), size(c, "thresholds_per_column"));
        const auto config = ensemble_config(c, mix_seed(seed, 0xe5));
        run.seeds["ensemble"] = config.seed;
        auto imp_d = std::make_shared<const IntrinsicImportance>(IntrinsicImportance::fit(d, scheme, config, size(c, "background_rows"), Exec::automatic, &d));
        auto imp_dp = std::make_shared<const IntrinsicImportance>(IntrinsicImportance::fit(dp, scheme, config, size(c, "background_rows"), Exec::automatic, &d));
        provider = make_lifim_provider(imp_d, imp_dp);
        importance = {{"used", true},
                      {"ensemble", to_json(config)},
                      {"binary_features", scheme.size()},
                      {"members_d", imp_d->ensemble.member_count()},
                      {"members_d_prime", imp_dp->ensemble.member_count()},
                      {"background", "shared sample of D"}};
    }
    const auto partials = partial_prototypes(protos, d, dp, popt, provider ? &*provider : nullptr);

    // Prototypes back on the input scale for reading.
    std::vector<Prototype> raw_protos = protos;
    if (normalize)
        for (auto& p : raw_protos) stats.invert_inplace(p.features);

    auto pj = nlohmann::json::array();
    for (std::size_t i = 0; i < protos.size(); ++i) {
        auto j = to_json(raw_protos[i], names);
        j["normalized"] = to_json(protos[i], names)["features"];
        pj.push_back(j);
    }
    auto nj = nlohmann::json::array();
    double nspd_sum = 0.0;
    for (const auto& n : nstats.prototypes) {
        nj.push_back(to_json(n));
        nspd_sum += n.nspd;
    }
    auto partj = nlohmann::json::array();
    for (const auto& p : partials) {
        auto j = to_json(p, names);
        j["prototype_id"] = protos[p.parent].id;
        for (std::size_t i = 0; i < p.indices.size(); ++i) j["features"][i]["raw_value"] = raw_protos[p.parent].features[p.indices[i]];
        partj.push_back(j);
    }

    // Facts the narrative quotes, chosen here so the Markdown only formats.
    nlohmann::json highlights = nlohmann::json::object();
    {
        const auto& ps = nstats.prototypes;
        auto hi = std::max_element(ps.begin(), ps.end(), [](const auto& a, const auto& b) { return a.nspd < b.nspd; });
        auto lo = std::min_element(ps.begin(), ps.end(), [](const auto& a, const auto& b) { return a.nspd < b.nspd; });
        highlights["most_over_d"] = {{"prototype_id", hi->prototype_id}, {"nspd", hi->nspd}};
        highlights["most_over_d_prime"] = {{"prototype_id", lo->prototype_id}, {"nspd", lo->nspd}};
        std::optional<std::size_t> far;
        for (std::size_t i = 0; i < ps.size(); ++i)
            if (ps[i].nsdd && (!far || std::abs(*ps[i].nsdd) > std::abs(*ps[*far].nsdd))) far = i;
        if (far) highlights["largest_nsdd"] = {{"prototype_id", ps[*far].prototype_id}, {"nsdd", *ps[*far].nsdd}};
        highlights["all_zero"] = std::all_of(ps.begin(), ps.end(), [](const auto& n) { return n.nspd == 0.0 && (!n.nsdd || *n.nsdd == 0.0); });
    }

    nlohmann::json embedding = nullptr;
    const auto emb_mode = text(c, "embedding");
    if (emb_mode != "none") {
        const std::size_t total = d.rows() + dp.rows() + protos.size();
        Embedding e;
        if (emb_mode == "pca") {
            RowMatrix all(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(m));
            all.topRows(static_cast<Eigen::Index>(d.rows())) = d.features();
            all.middleRows(static_cast<Eigen::Index>(d.rows()), static_cast<Eigen::Index>(dp.rows())) = dp.features();
            all.bottomRows(static_cast<Eigen::Index>(protos.size())) = prototype_matrix(protos);
            e = pca_embedding(all);
        } else {
            e = load_embedding(text(c, "embedding_file"), total);
        }
        std::string csv = "dataset,row,nearest_prototype,x,y\n";
        std::size_t r = 0;
        auto emit = [&](const char* set, std::size_t row, std::size_t nearest) {
            csv += fmt::format("{},{},{},{},{}\n", set, row, nearest, format_number(e.coords(static_cast<Eigen::Index>(r), 0)),
                               format_number(e.coords(static_cast<Eigen::Index>(r), 1)));
            ++r;
        };
        for (std::size_t i = 0; i < d.rows(); ++i) emit("d", i, protos[nstats.assignment_d[i]].id);
        for (std::size_t i = 0; i < dp.rows(); ++i) emit("d_prime", i, protos[nstats.assignment_dp[i]].id);
        for (std::size_t i = 0; i < protos.size(); ++i) emit("prototype", i, protos[i].id);
        out.write("embedding.csv", csv);
        embedding = {{"method", e.method}, {"note", e.note}, {"explained_variance", e.explained_variance}, {"file", "embedding.csv"}};
    }

    out.write("prototypes.csv", prototypes_csv(raw_protos, names));
    out.write("neighbourhood.csv", neighbourhood_csv(nstats));
    out.write("partial_prototypes.csv", partial_csv(partials, protos, names));

    run.results = {{"d", dataset_json(text(c, "d_name"), text(c, "d"), d_raw)},
                   {"d_prime", dataset_json(text(c, "d_prime_name"), text(c, "d_prime"), dp_raw)},
                   {"normalization", normalize ? to_json(stats) : nlohmann::json(nullptr)},
                   {"prototypes", pj},
                   {"neighbourhood", nj},
                   {"nspd_sum", nspd_sum},
                   {"partial_prototypes", partj},
                   {"importance", importance},
                   {"highlights", highlights},
                   {"embedding", embedding}};
    if (!normalize) run.notes.push_back("features were compared on their input scale (normalize = false)");
    return run;
}

nlohmann::json summary_row(const std::string& name, const TabularDataset& data) {
    nlohmann::json means = nlohmann::json::object(), ses = nlohmann::json::object();
    for (std::size_t j = 0; j < data.cols(); ++j) {
        std::vector<double> col(data.rows());
        for (std::size_t i = 0; i < data.rows(); ++i) col[i] = data.at(i, j);
        means[data.columns()[j].name] = data.rows() ? stats::mean(col) : 0.0;
        ses[data.columns()[j].name] = stats::standard_error(col);
    }
    std::size_t ones = 0;
    for (int y : data.labels()) ones += y == 1;
    return {{"dataset", name}, {"rows", data.rows()}, {"mean", means}, {"standard_error", ses},
            {"class_counts", {{"0", data.rows() - ones}, {"1", ones}}}};
}

std::string summary_csv(const nlohmann::json& rows, const std::vector<std::string>& names) {
    std::string out = "dataset";
    for (const auto& n : names) out += fmt::format(",{}_mean,{}_se", n, n);
    out += ",count_label_0,count_label_1\n";
    for (const auto& r : rows) {
        out += r["dataset"].get<std::string>();
        for (const auto& n : names)
            out += fmt::format(",{},{}", format_number(r["mean"][n].get<double>()), format_number(r["standard_error"][n].get<double>()));
        out += fmt::format(",{},{}\n", r["class_counts"]["0"].get<std::size_t>(), r["class_counts"]["1"].get<std::size_t>());
    }
    return out;
}

Run run_influence(const nlohmann::json& c, Output& out) {
    Run run;
    const auto label = text(c, "label");
    const auto d = load_csv(text(c, "d"), label);
    const auto dp = load_csv(text(c, "d_prime"), label);
    same_schema(d, dp);
    const std::size_t k = size(c, "k");
    if (k > dp.rows())
        fail(ErrorKind::ConfigError, fmt::format("k = {} exceeds the {} rows of {}", k, dp.rows(), text(c, "d_prime_name")));
    const std::uint64_t seed = u64(c, "seed");
    const auto scheme = fit_binarizer(concat(d, dp), size(c, "thresholds_per_column"));
    InfluenceOptions opt;
    opt.k = k;
    opt.logistic.l2 = real(c, "l2");
    opt.logistic.class_weights = c.at("class_weights").get<bool>();
    opt.ensemble = ensemble_config(c, mix_seed(seed, 0x1f));
    opt.background_rows = size(c, "background_rows");
    run.seeds = {{"seed", seed}, {"ensemble", opt.ensemble.seed}};
    const auto report = top_k_influential(d, dp, scheme, opt);

    const auto names = d.column_names();
    const auto influential = dp.subset(report.selected);
    auto rows = nlohmann::json::array({summary_row(text(c, "d_name"), d), summary_row(text(c, "d_prime_name"), dp),
                                       summary_row("influential", influential)});
    // Features where the influential rows sit furthest from D, in D standard errors.
    std::vector<std::pair<double, std::string>> gaps;
    for (const auto& n : names) {
        const double se = std::max(rows[0]["standard_error"][n].get<double>(), 1e-12);
        gaps.push_back({std::abs(rows[2]["mean"][n].get<double>() - rows[0]["mean"][n].get<double>()) / se, n});
    }
    std::stable_sort(gaps.begin(), gaps.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    auto highlights = nlohmann::json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(3, gaps.size()); ++i) {
        const auto& n = gaps[i].second;
        highlights.push_back({{"feature", n},
                              {"mean_influential", rows[2]["mean"][n]},
                              {"mean_d", rows[0]["mean"][n]},
                              {"mean_d_prime", rows[1]["mean"][n]},
                              {"gap_in_standard_errors", gaps[i].first}});
    }

    auto selected = nlohmann::json::array();
    for (auto i : report.selected) selected.push_back({{"row", i}, {"score", report.scores_dp[i]}});
    out.write("influence_scores.csv", influence_scores_csv(report));
    out.write("summary.csv", summary_csv(rows, names));
    out.write("influential_rows.csv", to_csv(influential, label));

    run.results = {{"d", dataset_json(text(c, "d_name"), text(c, "d"), d)},
                   {"d_prime", dataset_json(text(c, "d_prime_name"), text(c, "d_prime"), dp)},
                   {"binary_features", scheme.size()},
                   {"discriminator", {{"accuracy", report.discriminator_accuracy},
                                      {"iterations", report.model.iterations},
                                      {"converged", report.model.converged},
                                      {"gradient_norm", report.model.gradient_norm}}},
                   {"selected", selected},
                   {"gifim_d", to_json(report.gifim_d)},
                   {"gifim_d_prime", to_json(report.gifim_dp)},
                   {"gifim_d_prime_minus_selected", to_json(report.gifim_dp_minus_s)},
                   {"alignment", report.alignment ? nlohmann::json(*report.alignment) : nlohmann::json(nullptr)},
                   {"alignment_note", report.alignment_note},
                   {"summary", rows},
                   {"highlights", highlights}};
    return run;
}

std::unique_ptr<LlmProvider> provider_for(const nlohmann::json& c, const std::string& kind, const std::string& fixture) {
    if (kind == "mock") return make_provider("mock", {{"fixture", fixture}});
    return make_provider(kind, {{"endpoint", c["endpoint"]},
                                {"model", c["model"]},
                                {"api_key_env", c["api_key_env"]},
                                {"temperature", c["temperature"]},
                                {"timeout_s", c["timeout_s"]},
                                {"max_retries", c["max_retries"]},
                                {"backoff_ms", c["backoff_ms"]}});
}

Run run_attributes(const nlohmann::json& c, Output& out) {
    Run run;
    const auto attrs = c.at("attributes").get<AttributeSet>();
    const auto kind = text(c, "provider");
    const auto cd = load_corpus(text(c, "d"), text(c, "d_name"));
    const auto cdp = load_corpus(text(c, "d_prime"), text(c, "d_prime_name"));
    run.seeds = {{"split_seed", u64(c, "split_seed")}};

    AttributeRunOptions opt;
    opt.concurrency = size(c, "concurrency");
    auto tables = nlohmann::json::array();
    std::vector<AttributeTable> all;
    auto query = [&](const TextCorpus& corpus, const std::string& fixture, const std::string& audit) {
        auto provider = provider_for(c, kind, fixture);
        opt.audit_log = out.dir / audit;
        auto t = attribute_percentages(corpus, attrs, *provider, opt);
        out.files.insert(audit);
        if (!t.failures.empty()) run.status = "provider_error";
        auto j = to_json(t);
        j["audit_log"] = audit;
        tables.push_back(j);
        all.push_back(std::move(t));
    };
    auto separate = [&](const AttributeTable& a, const AttributeTable& b) -> nlohmann::json {
        nlohmann::json s{{"d", a.corpus}, {"d_prime", b.corpus}};
        if (!a.failures.empty() || !b.failures.empty()) {
            s["accuracy"] = nullptr;
            s["note"] = "skipped: provider failures left the tables incomplete";
            return s;
        }
        const auto r = separability_score(a, b, u64(c, "split_seed"), real(c, "l2"));
        s.update(to_json(r));
        if (r.imputed > 0) s["note"] = fmt::format("{} unparsed answers were counted as NO", r.imputed);
        return s;
    };

    query(cd, text(c, "fixture_d"), "audit_d.jsonl");
    query(cdp, text(c, "fixture_d_prime"), "audit_d_prime.jsonl");
    auto separability = nlohmann::json::array({separate(all[0], all[1])});
    nlohmann::json humanized = nullptr;
    if (c.at("humanize").get<bool>()) {
        try {
            auto rewriter = provider_for(c, text(c, "humanize_provider"), "");
            const auto ch = humanize_corpus(cdp, *rewriter, text(c, "humanized_name"));
            std::string csv = "id,text\n";
            for (const auto& doc : ch.documents()) {
                std::string quoted = "\"";
                for (char ch_ : doc.text) quoted += ch_ == '"' ? std::string("\"\"") : std::string(1, ch_);
                csv += doc.id + "," + quoted + "\"\n";
            }
            out.write("humanized.csv", csv);
            const auto fixture = text(c, "fixture_humanized").empty() ? text(c, "fixture_d_prime") : text(c, "fixture_humanized");
            query(ch, fixture, "audit_humanized.jsonl");
            separability.push_back(separate(all[0], all[2]));
            humanized = {{"name", ch.name()}, {"documents", ch.size()}, {"rewriter", text(c, "humanize_provider")}, {"file", "humanized.csv"}};
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ProviderError) throw;
            run.status = "provider_error";
            humanized = {{"error", e.what()}};
        }
    }
    out.write("attributes.csv", attribute_csv(all));

    // Per attribute, the corpus pair with the largest YES% gap.
    auto highlights = nlohmann::json::array();
    for (std::size_t k = 0; k < attrs.size(); ++k) {
        const auto a = all[0].yes_percent(k), b = all[1].yes_percent(k);
        if (!a || !b) continue;
        highlights.push_back({{"attribute", attrs[k]}, {"yes_percent_d", *a}, {"yes_percent_d_prime", *b}, {"gap", *b - *a}});
    }
    std::stable_sort(highlights.begin(), highlights.end(),
                     [](const auto& x, const auto& y) { return std::abs(x["gap"].template get<double>()) > std::abs(y["gap"].template get<double>()); });

    run.results = {{"provider", kind},
                   {"attributes", attrs},
                   {"tables", tables},
                   {"separability", separability},
                   {"humanized", humanized},
                   {"highlights", highlights},
                   {"percentages", "YES% counts parsed answers only; unparsed answers are tallied separately"}};
    if (kind == "http") run.notes.push_back("live provider: reruns may differ where the provider is nondeterministic");
    return run;
}

nlohmann::json faithfulness_summary(const std::vector<FaithfulnessSweep>& sweeps) {
    std::map<std::pair<std::size_t, std::string>, std::array<double, 4>> acc;   // rta, gpa, variance, count
    for (const auto& s : sweeps)
        for (const auto& r : s.records) {
            auto& a = acc[{r.k, r.selection}];
            a[0] += r.rta;
            a[1] += r.gpa;
            a[2] += r.variance;
            a[3] += 1.0;
        }
    auto out = nlohmann::json::array();
    for (const auto& [key, a] : acc)
        out.push_back({{"k", key.first}, {"selection", key.second}, {"rta", a[0] / a[3]}, {"gpa", a[1] / a[3]}, {"variance", a[2] / a[3]}});
    return out;
}

Run run_faithfulness(const nlohmann::json& c, Output& out) {
    Run run;
    const std::uint64_t seed = u64(c, "seed");
    CorpusContextOptions copt;
    copt.rows = size(c, "rows");
    copt.prototypes = size(c, "prototypes");
    copt.with_importance = false;
    FaithfulnessOptions fopt;
    for (const auto& k : c["ks"]) fopt.ks.push_back(k.get<std::size_t>());
    fopt.random_seeds = size(c, "random_seeds");
    fopt.n_trials = size(c, "n_trials");
    std::vector<FaithfulnessSweep> sweeps;
    std::string csv = "seed,k,selection,rta,gpa,variance,prototypes,seeds\n";
    auto seeds = nlohmann::json::array();
    for (std::uint64_t s = seed; s < seed + u64(c, "seeds"); ++s) {
        const auto ctx = corpus_context(s, copt);
        fopt.seed = s;
        sweeps.push_back(faithfulness_sweep(ctx, fopt));
        const auto body = faithfulness_csv(sweeps.back());
        std::size_t start = body.find('\n') + 1;
        while (start < body.size()) {
            const auto end = body.find('\n', start);
            csv += fmt::format("{},{}\n", s, body.substr(start, end - start));
            start = end + 1;
        }
        seeds.push_back(s);
    }
    out.write("faithfulness.csv", csv);
    const auto summary = faithfulness_summary(sweeps);
    run.seeds = {{"corpus_seeds", seeds}};
    run.results = {{"weights", {{"c1", 0.0}, {"c2", 0.0}, {"c3", 1.0}}},
                   {"features", sweeps.front().records.empty() ? 0 : sweeps.front().records.back().k},
                   {"mean_over_seeds", summary}};
    run.notes.push_back("scored selection uses value stability only (c1 = c2 = 0), so no importance models are fit");
    return run;
}

Run run_tradeoff(const nlohmann::json& c, Output& out) {
    Run run;
    const std::uint64_t seed = u64(c, "seed");
    CorpusContextOptions copt;
    copt.rows = size(c, "rows");
    copt.prototypes = size(c, "prototypes");
    copt.ensemble = ensemble_config(c, 0);
    copt.thresholds_per_column = size(c, "thresholds_per_column");
    copt.background_rows = size(c, "background_rows");
    const auto ctx = corpus_context(seed, copt);
    TradeoffOptions topt;
    topt.n_samples = size(c, "n_samples");
    topt.c_low = real(c, "c_low");
    topt.c_high = real(c, "c_high");
    topt.ks.clear();
    for (const auto& k : c["ks"]) topt.ks.push_back(k.get<std::size_t>());
    topt.seed = seed;
    const auto sweep = tradeoff_sweep(ctx, topt);
    out.write("tradeoff.csv", tradeoff_csv(sweep));
    auto corr = nlohmann::json::array();
    for (auto k : topt.ks) {
        const auto r = tradeoff_correlation(sweep, k);
        corr.push_back({{"k", k}, {"pearson", r ? nlohmann::json(*r) : nlohmann::json(nullptr)}});
    }
    const auto pooled = tradeoff_correlation(sweep);
    run.seeds = {{"seed", seed}, {"ensemble", mix_seed(seed, 0)}};
    run.results = {{"samples", topt.n_samples},
                   {"records", sweep.records.size()},
                   {"correlation_by_k", corr},
                   {"correlation_pooled", pooled ? nlohmann::json(*pooled) : nlohmann::json(nullptr)},
                   {"correlation", "Pearson of mean absolute rank against mean rank difference"}};
    return run;
}

Run run_validate_influence(const nlohmann::json& c, Output& out) {
    Run run;
    const auto v = validate_influence(size(c, "n"), size(c, "m"), real(c, "l2"), u64(c, "seed"), c["identical_rows"].get<bool>());
    out.write("influence_validation.csv", influence_validation_csv(v));
    run.seeds = {{"seed", v.seed}, {"test_set", mix_seed(v.seed, 0x7e57)}};
    const bool passes = v.pearson && *v.pearson >= real(c, "min_pearson");
    run.results = {{"n", v.n},
                   {"m", v.m},
                   {"l2", v.l2},
                   {"pearson", v.pearson ? nlohmann::json(*v.pearson) : nlohmann::json(nullptr)},
                   {"sign_agreement", v.sign_agreement},
                   {"degenerate", v.degenerate},
                   {"min_pearson", real(c, "min_pearson")},
                   {"passes", passes}};
    if (v.degenerate) run.notes.push_back("degenerate task: scores or oracle have no variance, so no correlation is reported");
    return run;
}

Run run_gen_mixture(const nlohmann::json& c, Output& out) {
    Run run;
    const int which = static_cast<int>(u64(c, "case"));
    const auto [sx, sy] = circle_case(which, u64(c, "seed"));
    const auto pair = gen_circle_mixture_pair(sx, sy);
    out.write("d.csv", to_csv(pair.x.data));
    out.write("d_prime.csv", to_csv(pair.y.data));
    out.write("centers.csv", to_csv(TabularDataset::from_matrix(pair.x.centers, {"x1", "x2"})));
    const auto gt = groundtruth_json(pair, sx, sy, which);
    out.write("groundtruth.json", gt.dump(2) + "\n");
    run.seeds = {{"seed", u64(c, "seed")}, {"d", sx.seed}, {"d_prime", sy.seed}, {"angles", mix_seed(sx.seed, 0xa9)}};
    run.results = {{"case", which},
                   {"rows_d", pair.x.data.rows()},
                   {"rows_d_prime", pair.y.data.rows()},
                   {"proportions_d", pair.x.proportions},
                   {"proportions_d_prime", pair.y.proportions},
                   {"expected_nspd", gt["expected_nspd"]},
                   {"nspd_tolerance", gt["nspd_tolerance"]},
                   {"next", "driftscope prototypes with method=manual, prototypes_file=centers.csv, normalize=false, c1=0, c2=0, partial_k=1"}};
    return run;
}

Run run_alignment(const nlohmann::json& c, Output& out) {
    Run run;
    const std::uint64_t seed = u64(c, "seed");
    const auto ps = planted_shift(seed, size(c, "rows"), real(c, "planted_fraction"));
    const auto scheme = fit_binarizer(concat(ps.d, ps.d_prime), size(c, "thresholds_per_column"));
    InfluenceOptions opt;
    opt.logistic.l2 = real(c, "l2");
    opt.ensemble = ensemble_config(c, mix_seed(seed, 0x1f));
    opt.background_rows = size(c, "background_rows");
    const auto fractions = c["fractions"].get<std::vector<double>>();
    const auto sweep = alignment_sweep(ps.d, ps.d_prime, scheme, opt, fractions, &ps.planted);
    out.write("alignment.csv", alignment_csv(sweep));
    auto points = nlohmann::json::array();
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < sweep.points.size(); ++i) {
        points.push_back(to_json(sweep.points[i]));
        const auto& a = sweep.points[i].alignment;
        if (a && (!best || *a > *sweep.points[*best].alignment)) best = i;
    }
    const std::size_t planted = static_cast<std::size_t>(std::count(ps.planted.begin(), ps.planted.end(), 1));
    run.seeds = {{"seed", seed}, {"ensemble", opt.ensemble.seed}};
    run.results = {{"rows_d", ps.d.rows()},
                   {"rows_d_prime", ps.d_prime.rows()},
                   {"planted_rows", planted},
                   {"discriminator_accuracy", sweep.discriminator_accuracy},
                   {"points", points},
                   {"best", best ? nlohmann::json{{"fraction", sweep.points[*best].fraction},
                                                  {"alignment", *sweep.points[*best].alignment},
                                                  {"before_last", *best + 1 < sweep.points.size()}}
                                 : nlohmann::json(nullptr)}};
    return run;
}

} // namespace

nlohmann::json run_command(Command c, const nlohmann::json& config, const std::filesystem::path& out_dir) {
    validate_config(c, config);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir))
        fail(ErrorKind::ConfigError, fmt::format("cannot create output directory {}", out_dir.string()));
    Output out{out_dir, {}};
    Run run;
    switch (c) {
    case Command::prototypes: run = run_prototypes(config, out); break;
    case Command::influence: run = run_influence(config, out); break;
    case Command::attributes: run = run_attributes(config, out); break;
    case Command::eval_faithfulness: run = run_faithfulness(config, out); break;
    case Command::eval_tradeoff: run = run_tradeoff(config, out); break;
    case Command::eval_validate_influence: run = run_validate_influence(config, out); break;
    case Command::eval_gen_mixture: run = run_gen_mixture(config, out); break;
    case Command::eval_alignment: run = run_alignment(config, out); break;
    }
    out.files.insert("report.json");
    out.files.insert("report.md");
    nlohmann::json report{{"tool", "driftscope"},
                          {"version", std::string(kVersion)},
                          {"command", command_name(c)},
                          {"status", run.status},
                          {"config", config},
                          {"seeds", run.seeds},
                          {"results", run.results},
                          {"notes", run.notes},
                          {"files", std::vector<std::string>(out.files.begin(), out.files.end())}};
    write_text(out_dir / "report.json", report.dump(2) + "\n");
    write_text(out_dir / "report.md", render_markdown(report));
    return report;
}

} // namespace driftscope
