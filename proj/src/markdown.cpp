#include "driftscope/report.hpp"

#include <fmt/format.h>

namespace driftscope {

namespace {

// Values are printed as the JSON has them, so every number in the Markdown
// can be found in report.json.
std::string v(const nlohmann::json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_null()) return "n/a";
    return j.dump();
}

std::string table(const nlohmann::json& rows, const std::vector<std::string>& cols) {
    std::string out = "|";
    for (const auto& c : cols) out += " " + c + " |";
    out += "\n|";
    for (std::size_t i = 0; i < cols.size(); ++i) out += " --- |";
    out += "\n";
    for (const auto& r : rows) {
        out += "|";
        for (const auto& c : cols) out += " " + (r.contains(c) ? v(r[c]) : std::string("n/a")) + " |";
        out += "\n";
    }
    return out + "\n";
}

void prototypes_md(const nlohmann::json& r, std::string& s) {
    const auto d = v(r["d"]["name"]), dp = v(r["d_prime"]["name"]);
    const auto& h = r["highlights"];
    s += "## Explanation\n\n";
    if (h["all_zero"].get<bool>()) {
        s += fmt::format("{} and {} place the same share of samples near every prototype, at the same mean distance "
                         "(all NSPD and NSDD values are zero).\n\n", d, dp);
    } else {
        const auto& over_d = h["most_over_d"];
        const auto& over_dp = h["most_over_d_prime"];
        s += fmt::format("Compared to {}, {}", d, dp);
        bool any = false;
        if (over_d["nspd"].get<double>() > 0.0) {
            s += fmt::format(" has fewer samples near prototype {} (NSPD {})", v(over_d["prototype_id"]), v(over_d["nspd"]));
            any = true;
        }
        if (over_dp["nspd"].get<double>() < 0.0) {
            s += fmt::format("{} more samples near prototype {} (NSPD {})", any ? " and" : " has", v(over_dp["prototype_id"]),
                             v(over_dp["nspd"]));
            any = true;
        }
        s += any ? ".\n" : " has the same share of samples near every prototype.\n";
        if (h.contains("largest_nsdd")) {
            const auto& x = h["largest_nsdd"];
            const double nsdd = x["nsdd"].get<double>();
            if (nsdd != 0.0)
                s += fmt::format("Around prototype {}, samples of {} lie {} the prototype than those of {} (NSDD {}).\n",
                                 v(x["prototype_id"]), dp, nsdd > 0.0 ? "closer to" : "further from", d, v(x["nsdd"]));
        }
        s += "\n";
    }
    for (const auto& p : r["partial_prototypes"]) {
        std::string parts;
        for (const auto& f : p["features"]) parts += (parts.empty() ? "" : ", ") + fmt::format("{} = {}", v(f["feature"]), v(f["raw_value"]));
        s += fmt::format("- Prototype {} is summarized by {}.\n", v(p["prototype_id"]), parts);
    }
    s += "\n## Neighbourhoods\n\n";
    s += table(r["neighbourhood"], {"prototype_id", "count_d", "count_dp", "proportion_d", "proportion_dp", "nspd", "nsdd"});
    if (!r["embedding"].is_null()) s += fmt::format("Embedding: {} ({}).\n\n", v(r["embedding"]["method"]), v(r["embedding"]["note"]));
}

void influence_md(const nlohmann::json& r, const nlohmann::json& config, std::string& s) {
    const auto d = v(r["d"]["name"]), dp = v(r["d_prime"]["name"]);
    s += "## Explanation\n\n";
    s += fmt::format("The {} rows of {} with the highest influence on the {}-versus-{} discriminator (accuracy {}) were selected.\n",
                     v(config["k"]), dp, d, dp, v(r["discriminator"]["accuracy"]));
    if (r["alignment"].is_null())
        s += fmt::format("No alignment is reported: {}.\n", v(r["alignment_note"]));
    else
        s += fmt::format("Removing them from {} gives an alignment of {} with {}.\n", dp, v(r["alignment"]), d);
    s += "\n";
    for (const auto& h : r["highlights"])
        s += fmt::format("- The influential rows have mean {} of {}, against {} in {} and {} in {}.\n", v(h["feature"]),
                         v(h["mean_influential"]), v(h["mean_d"]), d, v(h["mean_d_prime"]), dp);
    s += "\n## Summary\n\n";
    std::vector<std::string> cols{"dataset", "rows"};
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r["summary"]) {
        nlohmann::json flat{{"dataset", row["dataset"]}, {"rows", row["rows"]}};
        for (const auto& [name, mean] : row["mean"].items()) flat[name] = v(mean) + " ± " + v(row["standard_error"][name]);
        flat["class 0"] = row["class_counts"]["0"];
        flat["class 1"] = row["class_counts"]["1"];
        rows.push_back(flat);
    }
    for (const auto& name : r["d"]["columns"]) cols.push_back(name.get<std::string>());
    cols.push_back("class 0");
    cols.push_back("class 1");
    s += table(rows, cols);
}

void attributes_md(const nlohmann::json& r, std::string& s) {
    s += "## Explanation\n\n";
    const auto& tables = r["tables"];
    for (const auto& h : r["highlights"])
        s += fmt::format("- {} answers YES to \"{}\" in {}% of parsed answers, {} in {}%.\n", v(tables[1]["corpus"]), v(h["attribute"]),
                         v(h["yes_percent_d_prime"]), v(tables[0]["corpus"]), v(h["yes_percent_d"]));
    for (const auto& sep : r["separability"]) {
        if (sep["accuracy"].is_null())
            s += fmt::format("- Separability of {} and {}: {}.\n", v(sep["d"]), v(sep["d_prime"]), v(sep["note"]));
        else
            s += fmt::format("- A logistic model on the answers tells {} from {} with held-out accuracy {}.\n", v(sep["d"]),
                             v(sep["d_prime"]), v(sep["accuracy"]));
    }
    s += "\n## YES percentages\n\n";
    std::vector<std::string> cols{"corpus", "coverage"};
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& t : tables) {
        nlohmann::json row{{"corpus", t["corpus"]}, {"coverage", t["coverage"]}};
        for (const auto& a : t["attributes"]) row[a["attribute"].get<std::string>()] = a["yes_percent"];
        rows.push_back(row);
    }
    for (const auto& a : r["attributes"]) cols.push_back(a.get<std::string>());
    s += table(rows, cols);
    for (const auto& t : tables)
        for (const auto& f : t["failures"]) s += fmt::format("- Provider failure in {} ({}): {}\n", v(t["corpus"]), v(f["id"]), v(f["message"]));
}

void eval_md(const std::string& command, const nlohmann::json& r, std::string& s) {
    s += "## Results\n\n";
    if (command == "eval faithfulness") {
        s += table(r["mean_over_seeds"], {"k", "selection", "rta", "gpa", "variance"});
    } else if (command == "eval tradeoff") {
        s += fmt::format("Pooled correlation of mean absolute rank against mean rank difference: {}.\n\n", v(r["correlation_pooled"]));
        s += table(r["correlation_by_k"], {"k", "pearson"});
    } else if (command == "eval validate-influence") {
        s += fmt::format("Influence scores against leave-one-out refits: Pearson {}, sign agreement {}, passes {}.\n\n", v(r["pearson"]),
                         v(r["sign_agreement"]), v(r["passes"]));
    } else if (command == "eval gen-mixture") {
        s += fmt::format("Generated {} rows for D and {} rows for D'. Expected NSPD per cluster (tolerance {}): ", v(r["rows_d"]),
                         v(r["rows_d_prime"]), v(r["nspd_tolerance"]));
        std::string list;
        for (const auto& e : r["expected_nspd"]) list += (list.empty() ? "" : ", ") + v(e);
        s += list + ".\n\n";
    } else if (command == "eval alignment") {
        s += fmt::format("Discriminator accuracy {}. ", v(r["discriminator_accuracy"]));
        if (!r["best"].is_null())
            s += fmt::format("Best alignment {} at removed fraction {}.", v(r["best"]["alignment"]), v(r["best"]["fraction"]));
        s += "\n\n";
        s += table(r["points"], {"fraction", "removed", "alignment", "planted_removed"});
    }
}

} // namespace

std::string render_markdown(const nlohmann::json& report) {
    const auto command = report["command"].get<std::string>();
    std::string s = fmt::format("# driftscope {}\n\n", command);
    s += fmt::format("Status: {}. Tool version {}. Generated from report.json.\n\n", v(report["status"]), v(report["version"]));
    const auto& r = report["results"];
    if (command == "prototypes") prototypes_md(r, s);
    else if (command == "influence") influence_md(r, report["config"], s);
    else if (command == "attributes") attributes_md(r, s);
    else eval_md(command, r, s);
    if (!report["notes"].empty()) {
        s += "## Notes\n\n";
        for (const auto& n : report["notes"]) s += "- " + v(n) + "\n";
        s += "\n";
    }
    s += "## Files\n\n";
    for (const auto& f : report["files"]) s += "- " + v(f) + "\n";
    s += "\n## Configuration\n\n```json\n" + report["config"].dump(2) + "\n```\n\nSeeds:\n\n```json\n" + report["seeds"].dump(2) + "\n```\n";
    return s;
}

} // namespace driftscope
