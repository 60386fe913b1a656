#include "CLI11.hpp"

#include "driftscope/error.hpp"
#include "driftscope/parallel.hpp"
#include "driftscope/report.hpp"

#include <fmt/format.h>

#include <fstream>
#include <iostream>

using namespace driftscope;

namespace {

struct Flags {
    std::string config;
    std::vector<std::string> overrides;
    std::string out;
    bool print_config = false;
};

void add_flags(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON config file (a previous report.json also works)");
    sub->add_option("--set", f.overrides, "Override one config key: --set key=value (repeatable, wins over --config)");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_flag("--print-config", f.print_config, "Print the resolved config and exit");
}

nlohmann::json read_config(const std::string& path) {
    if (path.empty()) return nullptr;
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ConfigError, fmt::format("cannot open config file '{}'", path));
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) fail(ErrorKind::ConfigError, fmt::format("config file '{}' is not valid JSON", path));
    return j;
}

int run(Command command, const Flags& f) {
    const auto config = resolve_config(command, read_config(f.config), f.overrides);
    if (f.print_config) {
        std::cout << config.dump(2) << "\n";
        return 0;
    }
    if (f.out.empty()) fail(ErrorKind::ConfigError, "--out <dir> is required");
    const auto report = run_command(command, config, f.out);
    const auto status = report["status"].get<std::string>();
    std::cout << fmt::format("{}: wrote {}/report.json (status {})\n", command_name(command), f.out, status);
    return status == "provider_error" ? 3 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"driftscope: explain the differences between two datasets"};
    app.require_subcommand(1);
    int workers = 1;
    app.add_option("--workers", workers, "Worker threads for the parallel kernels (results do not depend on it)")
        ->check(CLI::PositiveNumber);

    Flags flags;
    std::optional<Command> chosen;
    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help, Command c) {
        auto* sub = parent->add_subcommand(name, help);
        add_flags(sub, flags);
        sub->callback([&chosen, c] { chosen = c; });
    };
    leaf(&app, "prototypes", "Prototype neighbourhood comparison (NSPD/NSDD) and partial prototypes", Command::prototypes);
    leaf(&app, "influence", "Rows of D' that drive the difference in intrinsic feature importance", Command::influence);
    leaf(&app, "attributes", "LLM attribute percentages and separability for two text corpora", Command::attributes);
    auto* eval = app.add_subcommand("eval", "Synthetic evaluations and generators");
    eval->require_subcommand(1);
    leaf(eval, "faithfulness", "RTA/GPA of partial prototypes against random feature subsets", Command::eval_faithfulness);
    leaf(eval, "tradeoff", "Rank difference against absolute rank over sampled weights", Command::eval_tradeoff);
    leaf(eval, "validate-influence", "Influence scores against leave-one-out refits", Command::eval_validate_influence);
    leaf(eval, "gen-mixture", "Paired circle mixtures with ground truth", Command::eval_gen_mixture);
    leaf(eval, "alignment", "Alignment against removed fraction on the planted-shift data", Command::eval_alignment);

    // CLI11 reports an unknown subcommand as a missing one; name it instead.
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg.rfind("-", 0) == 0) {
            if (arg == "--workers" && i + 1 < argc) ++i;
            continue;
        }
        if (!app.get_subcommand_no_throw(arg)) {
            std::cerr << fmt::format("driftscope: unknown subcommand '{}'\n\n", arg) << app.help();
            return 1;
        }
        auto* sub = app.get_subcommand(arg);
        if (sub->get_require_subcommand_min() > 0 && i + 1 < argc && argv[i + 1][0] != '-' && !sub->get_subcommand_no_throw(argv[i + 1])) {
            std::cerr << fmt::format("driftscope: unknown subcommand '{} {}'\n\n", arg, argv[i + 1]) << sub->help();
            return 1;
        }
        break;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "driftscope: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    set_num_workers(workers);
    try {
        return run(*chosen, flags);
    } catch (const Error& e) {
        std::cerr << "driftscope: error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "driftscope: error: " << e.what() << "\n";
        return 2;
    }
}
