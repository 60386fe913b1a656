#include "driftscope/report.hpp"

#include "driftscope/attributes.hpp"
#include "driftscope/sweeps.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <set>

namespace driftscope {

namespace {

enum class Kind { uint, number, boolean, string, path, strings, numbers, uints };

struct Key {
    std::string name;
    Kind kind;
    nlohmann::json value;
};

std::string_view kind_name(Kind k) {
    switch (k) {
    case Kind::uint: return "a non-negative integer";
    case Kind::number: return "a number";
    case Kind::boolean: return "true or false";
    case Kind::string: return "a string";
    case Kind::path: return "a path string";
    case Kind::strings: return "an array of strings";
    case Kind::numbers: return "an array of numbers";
    case Kind::uints: return "an array of non-negative integers";
    }
    return "?";
}

void add_ensemble(std::vector<Key>& keys) {
    keys.push_back({"bootstraps", Kind::uint, 10});
    keys.push_back({"epsilon", Kind::number, 0.01});
    keys.push_back({"depth", Kind::uint, 3});
    keys.push_back({"lambda", Kind::number, 0.01});
    keys.push_back({"candidates_per_bootstrap", Kind::uint, 8});
    keys.push_back({"feature_subsample", Kind::number, 0.6});
    keys.push_back({"thresholds_per_column", Kind::uint, 8});
    keys.push_back({"background_rows", Kind::uint, 128});
}

std::vector<Key> keys_for(Command c) {
    std::vector<Key> k;
    switch (c) {
    case Command::prototypes:
        k = {{"d", Kind::path, ""},
             {"d_prime", Kind::path, ""},
             {"d_name", Kind::string, "D"},
             {"d_prime_name", Kind::string, "D'"},
             {"label", Kind::string, ""},
             {"normalize", Kind::boolean, true},
             {"method", Kind::string, "kmeans"},
             {"k", Kind::uint, 6},
             {"grid_columns", Kind::strings, nlohmann::json::array()},
             {"percentiles", Kind::numbers, {10.0, 50.0, 90.0}},
             {"grid_tree_depth", Kind::uint, 2},
             {"prototypes_file", Kind::path, ""},
             {"metric", Kind::string, "euclidean"},
             {"label_aware", Kind::boolean, false},
             {"partial_k", Kind::uint, 3},
             {"delta_percentile", Kind::number, 10.0},
             {"delta_radius", Kind::number, 0.0},
             {"delta_per_side", Kind::boolean, false},
             {"c1", Kind::number, 1.0},
             {"c2", Kind::number, 1.0},
             {"c3", Kind::number, 1.0},
             {"embedding", Kind::string, "none"},
             {"embedding_file", Kind::path, ""},
             {"seed", Kind::uint, 0}};
        add_ensemble(k);
        break;
    case Command::influence:
        k = {{"d", Kind::path, ""},
             {"d_prime", Kind::path, ""},
             {"d_name", Kind::string, "D"},
             {"d_prime_name", Kind::string, "D'"},
             {"label", Kind::string, "label"},
             {"k", Kind::uint, 50},
             {"l2", Kind::number, 0.01},
             {"class_weights", Kind::boolean, false},
             {"seed", Kind::uint, 0}};
        add_ensemble(k);
        break;
    case Command::attributes:
        k = {{"d", Kind::path, ""},
             {"d_prime", Kind::path, ""},
             {"d_name", Kind::string, "D"},
             {"d_prime_name", Kind::string, "D'"},
             {"attributes", Kind::strings, default_attributes()},
             {"provider", Kind::string, "mock"},
             {"fixture_d", Kind::path, ""},
             {"fixture_d_prime", Kind::path, ""},
             {"fixture_humanized", Kind::path, ""},
             {"endpoint", Kind::string, "https://api.openai.com/v1/chat/completions"},
             {"model", Kind::string, "gpt-3.5-turbo"},
             {"api_key_env", Kind::string, "OPENAI_API_KEY"},
             {"temperature", Kind::number, 0.0},
             {"timeout_s", Kind::uint, 60},
             {"max_retries", Kind::uint, 3},
             {"backoff_ms", Kind::uint, 500},
             {"concurrency", Kind::uint, 1},
             {"humanize", Kind::boolean, false},
             {"humanize_provider", Kind::string, "echo"},
             {"humanized_name", Kind::string, "D' humanized"},
             {"split_seed", Kind::uint, 0},
             {"l2", Kind::number, 0.01}};
        break;
    case Command::eval_faithfulness:
        k = {{"seed", Kind::uint, 0},
             {"seeds", Kind::uint, 1},
             {"rows", Kind::uint, 400},
             {"prototypes", Kind::uint, 6},
             {"ks", Kind::uints, nlohmann::json::array()},
             {"random_seeds", Kind::uint, 10},
             {"n_trials", Kind::uint, 1000}};
        break;
    case Command::eval_tradeoff:
        k = {{"seed", Kind::uint, 0},
             {"rows", Kind::uint, 400},
             {"prototypes", Kind::uint, 6},
             {"n_samples", Kind::uint, 200},
             {"c_low", Kind::number, 0.01},
             {"c_high", Kind::number, 10.0},
             {"ks", Kind::uints, {3, 4, 5}}};
        add_ensemble(k);
        break;
    case Command::eval_validate_influence:
        k = {{"n", Kind::uint, 200},
             {"m", Kind::uint, 5},
             {"l2", Kind::number, 0.01},
             {"seed", Kind::uint, 0},
             {"identical_rows", Kind::boolean, false},
             {"min_pearson", Kind::number, 0.95}};
        break;
    case Command::eval_gen_mixture:
        k = {{"case", Kind::uint, 1}, {"seed", Kind::uint, 0}};
        break;
    case Command::eval_alignment:
        k = {{"seed", Kind::uint, 0},
             {"rows", Kind::uint, 400},
             {"planted_fraction", Kind::number, 0.05},
             {"fractions", Kind::numbers, nlohmann::json(default_removal_fractions())},
             {"l2", Kind::number, 0.01}};
        add_ensemble(k);
        break;
    }
    return k;
}

bool is_uint(const nlohmann::json& v) { return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); }

// Returns the value in canonical form or nullopt when it does not fit the kind.
std::optional<nlohmann::json> coerce(Kind kind, const nlohmann::json& v) {
    auto all = [&](auto pred) { return v.is_array() && std::all_of(v.begin(), v.end(), pred); };
    switch (kind) {
    case Kind::uint:
        if (is_uint(v)) return nlohmann::json(v.get<std::uint64_t>());
        return std::nullopt;
    case Kind::number:
        if (v.is_number()) return nlohmann::json(v.get<double>());
        return std::nullopt;
    case Kind::boolean:
        if (v.is_boolean()) return v;
        return std::nullopt;
    case Kind::string:
    case Kind::path:
        if (v.is_string()) return v;
        return std::nullopt;
    case Kind::strings:
        if (all([](const nlohmann::json& e) { return e.is_string(); })) return v;
        return std::nullopt;
    case Kind::numbers:
        if (all([](const nlohmann::json& e) { return e.is_number(); })) {
            auto out = nlohmann::json::array();
            for (const auto& e : v) out.push_back(e.get<double>());
            return out;
        }
        return std::nullopt;
    case Kind::uints:
        if (all(is_uint)) {
            auto out = nlohmann::json::array();
            for (const auto& e : v) out.push_back(e.get<std::uint64_t>());
            return out;
        }
        return std::nullopt;
    }
    return std::nullopt;
}

const Key& find_key(const std::vector<Key>& keys, Command c, const std::string& name) {
    for (const auto& k : keys)
        if (k.name == name) return k;
    std::string known;
    for (const auto& k : keys) known += (known.empty() ? "" : ", ") + k.name;
    fail(ErrorKind::ConfigError, fmt::format("unknown key '{}' for {} (known: {})", name, command_name(c), known));
}

void set_value(nlohmann::json& config, const Key& key, const nlohmann::json& v, std::string_view origin) {
    auto value = coerce(key.kind, v);
    if (!value) fail(ErrorKind::ConfigError, fmt::format("{}: '{}' must be {}, got {}", origin, key.name, kind_name(key.kind), v.dump()));
    config[key.name] = std::move(*value);
}

} // namespace

std::string command_name(Command c) {
    switch (c) {
    case Command::prototypes: return "prototypes";
    case Command::influence: return "influence";
    case Command::attributes: return "attributes";
    case Command::eval_faithfulness: return "eval faithfulness";
    case Command::eval_tradeoff: return "eval tradeoff";
    case Command::eval_validate_influence: return "eval validate-influence";
    case Command::eval_gen_mixture: return "eval gen-mixture";
    case Command::eval_alignment: return "eval alignment";
    }
    return "?";
}

std::vector<Command> all_commands() {
    return {Command::prototypes,      Command::influence,        Command::attributes,
            Command::eval_faithfulness, Command::eval_tradeoff, Command::eval_validate_influence,
            Command::eval_gen_mixture, Command::eval_alignment};
}

std::optional<Command> parse_command(std::string_view name) {
    for (auto c : all_commands())
        if (command_name(c) == name) return c;
    return std::nullopt;
}

nlohmann::json default_config(Command c) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& k : keys_for(c)) out[k.name] = *coerce(k.kind, k.value);
    return out;
}

nlohmann::json resolve_config(Command c, const nlohmann::json& user, const std::vector<std::string>& overrides) {
    const auto keys = keys_for(c);
    nlohmann::json config = default_config(c);
    const nlohmann::json* source = &user;
    if (user.is_object() && user.contains("command") && user.contains("config")) {
        if (user["command"] != command_name(c))
            fail(ErrorKind::ConfigError, fmt::format("the report was produced by '{}', not '{}'", user["command"].dump(), command_name(c)));
        source = &user["config"];
    }
    if (!source->is_null()) {
        if (!source->is_object()) fail(ErrorKind::ConfigError, "config must be a JSON object");
        for (const auto& [name, value] : source->items()) set_value(config, find_key(keys, c, name), value, "config");
    }
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) fail(ErrorKind::ConfigError, fmt::format("override '{}' is not key=value", item));
        const std::string name = item.substr(0, eq), text = item.substr(eq + 1);
        const Key& key = find_key(keys, c, name);
        nlohmann::json value;
        if (key.kind == Kind::string || key.kind == Kind::path) {
            value = text;
        } else {
            value = nlohmann::json::parse(text, nullptr, false);
            if (value.is_discarded()) fail(ErrorKind::ConfigError, fmt::format("override {}: cannot parse '{}'", name, text));
        }
        set_value(config, key, value, "override");
    }
    return config;
}

namespace {

struct Checker {
    Command command;
    const nlohmann::json& config;

    [[noreturn]] void bad(const std::string& key, const std::string& what) const {
        fail(ErrorKind::ConfigError, fmt::format("{}: '{}' {} (got {})", command_name(command), key, what, config.at(key).dump()));
    }
    double num(const std::string& key) const { return config.at(key).get<double>(); }
    std::uint64_t uint(const std::string& key) const { return config.at(key).get<std::uint64_t>(); }
    std::string str(const std::string& key) const { return config.at(key).get<std::string>(); }

    void at_least(const std::string& key, std::uint64_t lo) const {
        if (uint(key) < lo) bad(key, fmt::format("must be at least {}", lo));
    }
    void in_range(const std::string& key, double lo, double hi, bool open_lo = false) const {
        const double v = num(key);
        if (!(open_lo ? v > lo : v >= lo) || !(v <= hi))
            bad(key, fmt::format("must lie in {}{}, {}]", open_lo ? "(" : "[", lo, hi));
    }
    void one_of(const std::string& key, std::initializer_list<std::string_view> options) const {
        const auto v = str(key);
        for (auto o : options)
            if (v == o) return;
        std::string list;
        for (auto o : options) list += (list.empty() ? "" : ", ") + std::string(o);
        bad(key, fmt::format("must be one of {}", list));
    }
    void existing(const std::string& key, bool required) const {
        const auto p = str(key);
        if (p.empty()) {
            if (required) fail(ErrorKind::ConfigError, fmt::format("{}: '{}' is required (a file path)", command_name(command), key));
            return;
        }
        if (!std::filesystem::is_regular_file(p))
            fail(ErrorKind::ConfigError, fmt::format("{}: '{}' points to '{}', which does not exist or is not a file", command_name(command), key, p));
    }
    void ensemble() const {
        at_least("bootstraps", 1);
        in_range("epsilon", 0.0, 1e9);
        at_least("depth", 1);
        if (uint("depth") > 12) bad("depth", "must be at most 12");
        in_range("lambda", 0.0, 1e9);
        at_least("candidates_per_bootstrap", 1);
        in_range("feature_subsample", 0.0, 1.0, true);
        at_least("thresholds_per_column", 1);
        at_least("background_rows", 1);
    }
};

} // namespace

void validate_config(Command c, const nlohmann::json& config) {
    const auto keys = keys_for(c);
    for (const auto& k : keys) {
        if (!config.contains(k.name)) fail(ErrorKind::ConfigError, fmt::format("missing key '{}'", k.name));
        if (!coerce(k.kind, config[k.name])) fail(ErrorKind::ConfigError, fmt::format("'{}' must be {}", k.name, kind_name(k.kind)));
    }
    for (const auto& [name, v] : config.items()) find_key(keys, c, name);
    Checker ck{c, config};
    switch (c) {
    case Command::prototypes: {
        ck.existing("d", true);
        ck.existing("d_prime", true);
        ck.one_of("method", {"kmeans", "grid", "manual"});
        ck.one_of("metric", {"euclidean", "cosine"});
        ck.one_of("embedding", {"none", "pca", "file"});
        const auto method = ck.str("method");
        if (method == "kmeans") ck.at_least("k", 1);
        if (method == "grid") {
            if (config["grid_columns"].size() != 2) ck.bad("grid_columns", "must name exactly two columns for method grid");
            if (config["percentiles"].empty()) ck.bad("percentiles", "must not be empty");
            for (const auto& p : config["percentiles"])
                if (!(p.get<double>() > 0.0 && p.get<double>() < 100.0)) ck.bad("percentiles", "must lie in (0, 100)");
            ck.at_least("grid_tree_depth", 1);
        }
        ck.existing("prototypes_file", method == "manual");
        ck.existing("embedding_file", ck.str("embedding") == "file");
        ck.at_least("partial_k", 1);
        ck.in_range("delta_percentile", 0.0, 100.0, true);
        ck.in_range("delta_radius", 0.0, 1e300);
        for (auto key : {"c1", "c2", "c3"}) ck.in_range(key, 0.0, 1e9);
        if (ck.num("c1") + ck.num("c2") + ck.num("c3") <= 0.0) ck.bad("c3", "c1, c2 and c3 must not all be zero");
        if ((ck.num("c1") > 0.0 || ck.num("c2") > 0.0) && ck.str("label").empty())
            ck.bad("label", "is needed when c1 or c2 is nonzero (importance ranks come from models of the label); set label or c1 = c2 = 0");
        ck.ensemble();
        break;
    }
    case Command::influence:
        ck.existing("d", true);
        ck.existing("d_prime", true);
        if (ck.str("label").empty()) ck.bad("label", "must name the label column");
        ck.at_least("k", 1);
        ck.in_range("l2", 0.0, 1e9, true);
        ck.ensemble();
        break;
    case Command::attributes:
        ck.existing("d", true);
        ck.existing("d_prime", true);
        validate_attributes(config["attributes"].get<AttributeSet>());
        ck.one_of("provider", {"mock", "echo", "http"});
        ck.one_of("humanize_provider", {"echo", "http"});
        if (ck.str("provider") == "mock") {
            ck.existing("fixture_d", true);
            ck.existing("fixture_d_prime", true);
            ck.existing("fixture_humanized", false);
        }
        ck.in_range("temperature", 0.0, 2.0);
        ck.at_least("timeout_s", 1);
        ck.at_least("concurrency", 1);
        ck.in_range("l2", 0.0, 1e9, true);
        break;
    case Command::eval_faithfulness:
        ck.at_least("seeds", 1);
        ck.at_least("rows", 20);
        ck.at_least("prototypes", 1);
        ck.at_least("random_seeds", 1);
        ck.at_least("n_trials", 1);
        for (const auto& k : config["ks"])
            if (k.get<std::uint64_t>() < 1) ck.bad("ks", "entries must be at least 1");
        break;
    case Command::eval_tradeoff:
        ck.at_least("rows", 20);
        ck.at_least("prototypes", 1);
        ck.at_least("n_samples", 2);
        ck.in_range("c_low", 0.0, 1e9, true);
        if (ck.num("c_high") < ck.num("c_low")) ck.bad("c_high", "must be at least c_low");
        if (config["ks"].empty()) ck.bad("ks", "must not be empty");
        for (const auto& k : config["ks"])
            if (k.get<std::uint64_t>() < 1) ck.bad("ks", "entries must be at least 1");
        ck.ensemble();
        break;
    case Command::eval_validate_influence:
        ck.at_least("n", 20);
        ck.at_least("m", 1);
        ck.in_range("l2", 0.0, 1e9, true);
        ck.in_range("min_pearson", -1.0, 1.0);
        break;
    case Command::eval_gen_mixture:
        if (ck.uint("case") != 1 && ck.uint("case") != 2) ck.bad("case", "must be 1 or 2");
        break;
    case Command::eval_alignment:
        ck.at_least("rows", 20);
        ck.in_range("planted_fraction", 0.0, 1.0, true);
        if (ck.num("planted_fraction") >= 1.0) ck.bad("planted_fraction", "must be below 1");
        if (config["fractions"].empty()) ck.bad("fractions", "must not be empty");
        for (const auto& f : config["fractions"])
            if (!(f.get<double>() > 0.0 && f.get<double>() <= 1.0)) ck.bad("fractions", "entries must lie in (0, 1]");
        ck.in_range("l2", 0.0, 1e9, true);
        ck.ensemble();
        break;
    }
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ProviderError: return 3;
    case ErrorKind::ZeroVector:
    case ErrorKind::NoPrototypes:
    case ErrorKind::EmptyBackground:
    case ErrorKind::SingleClass:
    case ErrorKind::NonConvergence:
    case ErrorKind::SingularHessian:
    case ErrorKind::EmptyRemainder:
    case ErrorKind::IdenticalGifims: return 2;
    default: return 1;
    }
}

} // namespace driftscope
