#pragma once

#include "driftscope/error.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace driftscope {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Command {
    prototypes,
    influence,
    attributes,
    eval_faithfulness,
    eval_tradeoff,
    eval_validate_influence,
    eval_gen_mixture,
    eval_alignment,
};

// "prototypes", ..., "eval faithfulness", "eval validate-influence", ...
std::string command_name(Command c);
std::optional<Command> parse_command(std::string_view name);
std::vector<Command> all_commands();

// Every key a command accepts, with its default. Keys absent here are rejected.
nlohmann::json default_config(Command c);

// Defaults, then the user config, then key=value overrides (values parsed as
// JSON when possible, else taken as strings). A report.json may be passed as
// the user config; its embedded config is used. Throws ConfigError for
// unknown keys or mistyped values.
nlohmann::json resolve_config(Command c, const nlohmann::json& user, const std::vector<std::string>& overrides = {});

// Ranges and file existence. Throws ConfigError naming the key or path.
void validate_config(Command c, const nlohmann::json& config);

// Runs a resolved, validated config and writes report.json, report.md and the
// command's CSV/JSON artifacts into out. Returns the report. A provider
// failure in the attributes command still writes a partial report; its
// "status" is then "provider_error".
nlohmann::json run_command(Command c, const nlohmann::json& config, const std::filesystem::path& out);

// Markdown generated from report.json alone. Numbers are printed exactly as
// they appear in the JSON.
std::string render_markdown(const nlohmann::json& report);

// 1 for input/config problems, 2 for failures during computation, 3 for provider failures.
int exit_code_for(ErrorKind kind);

} // namespace driftscope
