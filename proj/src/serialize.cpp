#include "driftscope/serialize.hpp"

#include "driftscope/error.hpp"

#include <fmt/format.h>

#include <fstream>
#include <set>

namespace driftscope {

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::string num(double v) { return format_number(v); }
std::string num(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::string cell(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

nlohmann::json to_json(const Prototype& p, const std::vector<std::string>& names) {
    nlohmann::json features = nlohmann::json::object();
    for (std::size_t j = 0; j < p.features.size(); ++j) features[names.at(j)] = p.features[j];
    return {{"id", p.id},
            {"provenance", std::string(to_string(p.provenance))},
            {"label", p.label ? nlohmann::json(*p.label) : nlohmann::json(nullptr)},
            {"features", features}};
}

nlohmann::json to_json(const NormalizationStats& s) {
    auto cols = nlohmann::json::array();
    for (const auto& c : s.columns)
        cols.push_back({{"name", c.name}, {"mean", c.mean}, {"stddev", c.stddev}, {"pass_through", c.pass_through},
                        {"zero_variance", c.zero_variance}});
    return {{"reference", s.reference}, {"columns", cols}};
}

nlohmann::json to_json(const PrototypeNeighbours& n) {
    return {{"prototype_id", n.prototype_id},       {"count_d", n.count_d},
            {"count_dp", n.count_dp},               {"proportion_d", n.proportion_d},
            {"proportion_dp", n.proportion_dp},     {"mean_distance_d", opt(n.mean_distance_d)},
            {"mean_distance_dp", opt(n.mean_distance_dp)}, {"nspd", n.nspd},
            {"nsdd", opt(n.nsdd)}};
}

nlohmann::json to_json(const PartialPrototype& p, const std::vector<std::string>& names) {
    auto features = nlohmann::json::array();
    for (std::size_t i = 0; i < p.indices.size(); ++i)
        features.push_back({{"feature", names.at(p.indices[i])}, {"value", p.values[i]}, {"score", p.scores[p.indices[i]]}});
    return {{"parent", p.parent},
            {"features", features},
            {"scores", p.scores},
            {"neighbours_d", p.neighbours_d},
            {"neighbours_dp", p.neighbours_dp},
            {"empty_d", p.empty_d},
            {"empty_dp", p.empty_dp}};
}

nlohmann::json to_json(const ImportanceVector& v) {
    nlohmann::json values = nlohmann::json::object();
    for (std::size_t j = 0; j < v.values.size(); ++j) values[v.feature_names.at(j)] = v.values[j];
    return {{"kind", std::string(to_string(v.kind))}, {"subject", v.subject}, {"values", values}};
}

nlohmann::json to_json(const FaithfulnessRecord& r) {
    return {{"k", r.k},   {"selection", r.selection}, {"rta", r.rta},         {"gpa", r.gpa},
            {"variance", r.variance}, {"prototypes", r.prototypes}, {"seeds", r.seeds}};
}

nlohmann::json to_json(const TradeoffRecord& r) {
    return {{"sample", r.sample},
            {"c1", r.weights.c1},
            {"c2", r.weights.c2},
            {"c3", r.weights.c3},
            {"k", r.k},
            {"rank_difference", r.rank_difference},
            {"absolute_rank", r.absolute_rank},
            {"value_deviation", r.value_deviation}};
}

nlohmann::json to_json(const AlignmentPoint& p) {
    return {{"fraction", p.fraction}, {"removed", p.removed}, {"alignment", opt(p.alignment)}, {"planted_removed", p.planted_removed}};
}

nlohmann::json to_json(const AttributeTable& t) {
    auto attrs = nlohmann::json::array();
    for (std::size_t k = 0; k < t.attributes.size(); ++k) {
        attrs.push_back({{"attribute", t.attributes[k]},
                         {"yes", t.yes[k]},
                         {"no", t.no[k]},
                         {"unparsed", t.unparsed[k]},
                         {"answered", t.answered(k)},
                         {"yes_percent", opt(t.yes_percent(k))},
                         {"yes_share", t.yes_share(k)},
                         {"no_share", t.no_share(k)},
                         {"unparsed_share", t.unparsed_share(k)}});
    }
    auto failures = nlohmann::json::array();
    for (const auto& f : t.failures) failures.push_back({{"id", f.id}, {"message", f.message}});
    return {{"corpus", t.corpus},
            {"corpus_size", t.corpus_size},
            {"documents_answered", t.documents.size()},
            {"coverage", t.coverage()},
            {"unparsed_total", t.total_unparsed()},
            {"attributes", attrs},
            {"failures", failures}};
}

nlohmann::json to_json(const Separability& s) {
    return {{"accuracy", s.accuracy}, {"train_rows", s.train_rows}, {"test_rows", s.test_rows}, {"imputed_unparsed", s.imputed}};
}

nlohmann::json to_json(const EnsembleConfig& c) {
    return {{"bootstraps", c.bootstraps},
            {"epsilon", c.epsilon},
            {"depth", c.depth},
            {"lambda", c.lambda},
            {"candidates_per_bootstrap", c.candidates_per_bootstrap},
            {"feature_subsample", c.feature_subsample},
            {"seed", c.seed}};
}

nlohmann::json groundtruth_json(const MixturePair& pair, const MixturePairSpec& spec_x, const MixturePairSpec& spec_y,
                                int which_case) {
    auto spec = [](const MixturePairSpec& s) {
        return nlohmann::json{{"k", s.k},
                              {"radius", s.radius},
                              {"per_cluster", s.per_cluster},
                              {"total", s.total},
                              {"std", s.std},
                              {"proportions", s.proportions == ProportionMode::equal ? "equal" : "dirichlet"},
                              {"alpha", s.alpha},
                              {"seed", s.seed}};
    };
    auto side = [](const MixtureSample& s) {
        auto centers = nlohmann::json::array();
        for (Eigen::Index c = 0; c < s.centers.rows(); ++c) centers.push_back({s.centers(c, 0), s.centers(c, 1)});
        std::vector<std::size_t> counts(static_cast<std::size_t>(s.centers.rows()), 0);
        for (auto c : s.cluster) ++counts[c];
        return nlohmann::json{{"rows", s.data.rows()}, {"centers", centers}, {"proportions", s.proportions}, {"counts", counts},
                              {"cluster", s.cluster}};
    };
    std::vector<double> expected;
    for (std::size_t c = 0; c < pair.angles.size(); ++c) expected.push_back(pair.x.proportions[c] - pair.y.proportions[c]);
    return {{"case", which_case},
            {"angles", pair.angles},
            {"x", spec(spec_x)},
            {"y", spec(spec_y)},
            {"d", side(pair.x)},
            {"d_prime", side(pair.y)},
            {"prototypes", "centers of d"},
            {"expected_nspd", expected},
            {"nspd_tolerance", 3.0 / std::sqrt(static_cast<double>(pair.y.data.rows()))}};
}

std::string prototypes_csv(const std::vector<Prototype>& prototypes, const std::vector<std::string>& names) {
    std::string out = "prototype_id,provenance,label";
    for (const auto& n : names) out += "," + cell(n);
    out += '\n';
    for (const auto& p : prototypes) {
        out += fmt::format("{},{},{}", p.id, to_string(p.provenance), p.label ? std::to_string(*p.label) : "");
        for (double v : p.features) out += "," + num(v);
        out += '\n';
    }
    return out;
}

std::string neighbourhood_csv(const NeighbourhoodStats& stats) {
    std::string out = "prototype_id,count_d,count_dp,proportion_d,proportion_dp,mean_distance_d,mean_distance_dp,nspd,nsdd\n";
    for (const auto& n : stats.prototypes) {
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", n.prototype_id, n.count_d, n.count_dp, num(n.proportion_d),
                           num(n.proportion_dp), num(n.mean_distance_d), num(n.mean_distance_dp), num(n.nspd), num(n.nsdd));
    }
    return out;
}

std::string partial_csv(const std::vector<PartialPrototype>& partials, const std::vector<Prototype>& prototypes,
                        const std::vector<std::string>& names) {
    std::string out = "prototype_id,position,feature,value,score,neighbours_d,neighbours_dp\n";
    for (const auto& p : partials) {
        for (std::size_t i = 0; i < p.indices.size(); ++i) {
            out += fmt::format("{},{},{},{},{},{},{}\n", prototypes.at(p.parent).id, i + 1, cell(names.at(p.indices[i])),
                               num(p.values[i]), num(p.scores[p.indices[i]]), p.neighbours_d, p.neighbours_dp);
        }
    }
    return out;
}

std::string faithfulness_csv(const FaithfulnessSweep& sweep) {
    std::string out = "k,selection,rta,gpa,variance,prototypes,seeds\n";
    for (const auto& r : sweep.records)
        out += fmt::format("{},{},{},{},{},{},{}\n", r.k, r.selection, num(r.rta), num(r.gpa), num(r.variance), r.prototypes, r.seeds);
    return out;
}

std::string tradeoff_csv(const TradeoffSweep& sweep) {
    std::string out = "sample,c1,c2,c3,k,rank_difference,absolute_rank,value_deviation\n";
    for (const auto& r : sweep.records)
        out += fmt::format("{},{},{},{},{},{},{},{}\n", r.sample, num(r.weights.c1), num(r.weights.c2), num(r.weights.c3), r.k,
                           num(r.rank_difference), num(r.absolute_rank), num(r.value_deviation));
    return out;
}

std::string alignment_csv(const AlignmentSweep& sweep) {
    std::string out = "fraction,removed,alignment,planted_removed\n";
    for (const auto& p : sweep.points)
        out += fmt::format("{},{},{},{}\n", num(p.fraction), p.removed, num(p.alignment), p.planted_removed);
    return out;
}

std::string influence_validation_csv(const InfluenceValidation& v) {
    std::string out = "row,score,oracle\n";
    for (std::size_t i = 0; i < v.scores.size(); ++i) out += fmt::format("{},{},{}\n", i, num(v.scores[i]), num(v.oracle[i]));
    return out;
}

std::string influence_scores_csv(const InfluenceReport& r) {
    std::set<std::size_t> selected(r.selected.begin(), r.selected.end());
    std::string out = "dataset,row,score,selected\n";
    for (std::size_t i = 0; i < r.scores_d.size(); ++i) out += fmt::format("d,{},{},0\n", i, num(r.scores_d[i]));
    for (std::size_t i = 0; i < r.scores_dp.size(); ++i)
        out += fmt::format("d_prime,{},{},{}\n", i, num(r.scores_dp[i]), selected.count(i) ? 1 : 0);
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::ConfigError, fmt::format("cannot write {}", path.string()));
    out << text;
    if (!out) fail(ErrorKind::ConfigError, fmt::format("write to {} failed", path.string()));
}

} // namespace driftscope
