#include "doctest.h"

#include "driftscope/parallel.hpp"
#include "driftscope/report.hpp"

#include <fmt/format.h>
#include <unistd.h>

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

using namespace driftscope;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / fmt::format("driftscope_cli_{}_{}", tag, getpid());
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& s) const { return path / s; }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
    return files;
}

json run(Command c, const json& user, const std::vector<std::string>& overrides, const fs::path& out) {
    const auto config = resolve_config(c, user, overrides);
    validate_config(c, config);
    return run_command(c, config, out);
}

void collect_numbers(const json& j, std::set<std::string>& out) {
    static const std::regex num(R"(-?\d+(\.\d+)?([eE][-+]?\d+)?)");
    if (j.is_number()) {
        out.insert(j.dump());
    } else if (j.is_string()) {
        const auto s = j.get<std::string>();
        for (std::sregex_iterator it(s.begin(), s.end(), num), end; it != end; ++it) out.insert(it->str());
    } else if (j.is_structured()) {
        for (const auto& [k, v] : j.items()) {
            collect_numbers(json(k), out);
            collect_numbers(v, out);
        }
    }
}

// Every number printed in report.md, outside the embedded JSON blocks, is
// present verbatim in report.json.
void check_markdown_numbers(const fs::path& dir) {
    const auto md = slurp(dir / "report.md");
    const auto report = json::parse(slurp(dir / "report.json"));
    CHECK(md == render_markdown(report));
    std::set<std::string> known;
    collect_numbers(report, known);
    const auto body = md.substr(0, md.find("## Configuration"));
    static const std::regex num(R"(-?\d+(\.\d+)?([eE][-+]?\d+)?)");
    std::size_t checked = 0;
    for (std::sregex_iterator it(body.begin(), body.end(), num), end; it != end; ++it) {
        const auto tok = it->str();
        INFO("token " << tok << " in " << dir.string());
        CHECK(known.count(tok) == 1);
        ++checked;
    }
    CHECK(checked > 0);
}

const std::string kMixD = "x1,x2\n0,0\n0.5,0.2\n0.1,0.4\n9,9\n9.2,8.7\n8.8,9.1\n0.3,0.1\n9.1,9.3\n";
const std::string kMixDp = "x1,x2\n0,0.1\n9,9\n9.5,9.2\n8.9,9.4\n9.3,8.8\n0.2,0.3\n9.6,9.1\n";

} // namespace

TEST_CASE("command names round trip") {
    for (auto c : all_commands()) {
        const auto name = command_name(c);
        REQUIRE(parse_command(name).has_value());
        CHECK(*parse_command(name) == c);
    }
    CHECK(command_name(Command::eval_validate_influence) == "eval validate-influence");
    CHECK_FALSE(parse_command("eval nothing").has_value());
}

TEST_CASE("defaults resolve and every key is known") {
    for (auto c : all_commands()) {
        const auto d = default_config(c);
        CHECK(d.is_object());
        CHECK(resolve_config(c, nullptr) == d);
        CHECK(resolve_config(c, d) == d);
    }
    for (auto c : {Command::eval_faithfulness, Command::eval_tradeoff, Command::eval_validate_influence, Command::eval_gen_mixture,
                   Command::eval_alignment})
        CHECK_NOTHROW(validate_config(c, default_config(c)));
}

TEST_CASE("config errors name the problem") {
    auto kind_of = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return std::optional<ErrorKind>(e.kind());
        }
        return std::optional<ErrorKind>();
    };
    CHECK(kind_of([] { resolve_config(Command::eval_faithfulness, json{{"nonsense", 1}}); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { resolve_config(Command::eval_faithfulness, json{{"rows", "many"}}); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { resolve_config(Command::eval_faithfulness, nullptr, {"rows"}); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { resolve_config(Command::eval_faithfulness, nullptr, {"bogus=3"}); }) == ErrorKind::ConfigError);
    CHECK(kind_of([] { validate_config(Command::prototypes, default_config(Command::prototypes)); }) == ErrorKind::ConfigError);

    try {
        resolve_config(Command::eval_faithfulness, json{{"nonsense", 1}});
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("nonsense") != std::string::npos);
    }

    auto c = default_config(Command::prototypes);
    c["d"] = "/definitely/not/here.csv";
    try {
        validate_config(Command::prototypes, c);
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("/definitely/not/here.csv") != std::string::npos);
    }
}

TEST_CASE("overrides win over the config file and are typed") {
    const auto c = resolve_config(Command::eval_validate_influence, json{{"n", 50}}, {"n=80", "min_pearson=0.5"});
    CHECK(c["n"] == 80);
    CHECK(c["min_pearson"].get<double>() == doctest::Approx(0.5));
    const auto p = resolve_config(Command::prototypes, nullptr, {"d=a b.csv", "d_name=My data"});
    CHECK(p["d"] == "a b.csv");
    CHECK(p["d_name"] == "My data");
}

TEST_CASE("exit codes") {
    CHECK(exit_code_for(ErrorKind::ConfigError) == 1);
    CHECK(exit_code_for(ErrorKind::ProviderError) == 3);
    CHECK(exit_code_for(ErrorKind::SingularHessian) == 2);
    CHECK(exit_code_for(ErrorKind::EmptyRemainder) == 2);
}

TEST_CASE("eval runs are deterministic and reproducible from report.json") {
    TempDir tmp("eval");
    const std::vector<std::pair<Command, std::vector<std::string>>> runs{
        {Command::eval_gen_mixture, {"case=2"}},
        {Command::eval_validate_influence, {"n=60"}},
        {Command::eval_faithfulness, {"rows=120", "random_seeds=3", "n_trials=200"}},
        {Command::eval_tradeoff, {"rows=120", "n_samples=20"}},
        {Command::eval_alignment, {"rows=160"}},
    };
    int i = 0;
    for (const auto& [c, overrides] : runs) {
        INFO(command_name(c));
        const auto a = tmp / fmt::format("a{}", i), b = tmp / fmt::format("b{}", i), r = tmp / fmt::format("r{}", i);
        const auto ra = run(c, nullptr, overrides, a);
        run(c, nullptr, overrides, b);
        CHECK(snapshot(a) == snapshot(b));
        run(c, json::parse(slurp(a / "report.json")), {}, r);
        CHECK(snapshot(a) == snapshot(r));
        CHECK(ra["status"] == "ok");
        CHECK(ra["command"] == command_name(c));
        check_markdown_numbers(a);
        ++i;
    }
}

TEST_CASE("worker count does not change a report") {
    TempDir tmp("workers");
    set_num_workers(1);
    run(Command::eval_tradeoff, nullptr, {"rows=120", "n_samples=10"}, tmp / "one");
    set_num_workers(4);
    run(Command::eval_tradeoff, nullptr, {"rows=120", "n_samples=10"}, tmp / "four");
    set_num_workers(1);
    CHECK(snapshot(tmp / "one") == snapshot(tmp / "four"));
}

TEST_CASE("prototypes report") {
    TempDir tmp("proto");
    write(tmp / "d.csv", kMixD);
    write(tmp / "dp.csv", kMixDp);
    write(tmp / "protos.csv", "x1,x2\n0,0\n9,9\n");
    const auto d = (tmp / "d.csv").string(), dp = (tmp / "dp.csv").string();

    SUBCASE("manual prototypes on raw data") {
        const auto r = run(Command::prototypes, nullptr,
                           {"d=" + d, "d_prime=" + dp, "method=manual", "prototypes_file=" + (tmp / "protos.csv").string(),
                            "normalize=false", "c1=0", "c2=0", "partial_k=1", "embedding=pca"},
                           tmp / "out");
        const auto& nb = r["results"]["neighbourhood"];
        REQUIRE(nb.size() == 2);
        // D has 4 of 8 rows near (0,0), D' has 2 of 7.
        CHECK(nb[0]["nspd"].get<double>() == doctest::Approx(4.0 / 8 - 2.0 / 7).epsilon(1e-12));
        CHECK(nb[1]["nspd"].get<double>() == doctest::Approx(2.0 / 7 - 4.0 / 8).epsilon(1e-12));
        CHECK(fs::exists(tmp / "out" / "embedding.csv"));
        CHECK(fs::exists(tmp / "out" / "neighbourhood.csv"));
        check_markdown_numbers(tmp / "out");
        run(Command::prototypes, json::parse(slurp(tmp / "out" / "report.json")), {}, tmp / "again");
        CHECK(snapshot(tmp / "out") == snapshot(tmp / "again"));
    }
    SUBCASE("identical inputs give all-zero differences") {
        const auto r = run(Command::prototypes, nullptr, {"d=" + d, "d_prime=" + d, "k=2", "c1=0", "c2=0", "partial_k=1"}, tmp / "same");
        CHECK(r["results"]["highlights"]["all_zero"] == true);
        CHECK(slurp(tmp / "same" / "report.md").find("all NSPD and NSDD values are zero") != std::string::npos);
    }
    SUBCASE("partial_k above the feature count is a config error") {
        CHECK_THROWS_AS(run(Command::prototypes, nullptr, {"d=" + d, "d_prime=" + dp, "k=2", "c1=0", "c2=0", "partial_k=3"}, tmp / "x"),
                        Error);
    }
}

TEST_CASE("influence report") {
    TempDir tmp("influence");
    std::string d = "a,b,label\n", dp = "a,b,label\n";
    for (int i = 0; i < 60; ++i) {
        const double a = (i % 10) / 10.0, b = ((i * 7) % 13) / 13.0;
        d += fmt::format("{},{},{}\n", a, b, a + b > 1.0 ? 1 : 0);
        dp += fmt::format("{},{},{}\n", i < 6 ? a + 3.0 : a, b, a + b > 1.0 ? 1 : 0);
    }
    write(tmp / "d.csv", d);
    write(tmp / "dp.csv", dp);
    const std::vector<std::string> base{"d=" + (tmp / "d.csv").string(), "d_prime=" + (tmp / "dp.csv").string(), "bootstraps=4",
                                        "background_rows=32"};
    auto ok = base;
    ok.push_back("k=6");
    const auto r = run(Command::influence, nullptr, ok, tmp / "out");
    CHECK(r["status"] == "ok");
    CHECK(fs::exists(tmp / "out" / "summary.csv"));
    CHECK(fs::exists(tmp / "out" / "influence_scores.csv"));
    check_markdown_numbers(tmp / "out");
    run(Command::influence, nullptr, ok, tmp / "again");
    CHECK(snapshot(tmp / "out") == snapshot(tmp / "again"));

    auto too_many = base;
    too_many.push_back("k=61");
    try {
        run(Command::influence, nullptr, too_many, tmp / "x");
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
    }
}

TEST_CASE("attributes report with the mock provider") {
    TempDir tmp("attrs");
    std::string a, b;
    json fd, fdp;
    for (int i = 1; i <= 12; ++i) {
        a += fmt::format("human text {}\n", i);
        b += fmt::format("generated text {}\n", i);
        fd[std::to_string(i)] = {i % 3 == 0, false, "NO", i % 2 == 0, false};
        fdp[std::to_string(i)] = {true, true, "YES", i % 4 != 0, true};
    }
    write(tmp / "a.txt", a);
    write(tmp / "b.txt", b);
    write(tmp / "fd.json", fd.dump());
    write(tmp / "fdp.json", fdp.dump());
    const std::vector<std::string> o{"d=" + (tmp / "a.txt").string(), "d_prime=" + (tmp / "b.txt").string(), "provider=mock",
                                     "fixture_d=" + (tmp / "fd.json").string(), "fixture_d_prime=" + (tmp / "fdp.json").string(),
                                     "humanize=true"};
    for (int rep = 0; rep < 3; ++rep) run(Command::attributes, nullptr, o, tmp / fmt::format("r{}", rep));
    CHECK(snapshot(tmp / "r0") == snapshot(tmp / "r1"));
    CHECK(snapshot(tmp / "r0") == snapshot(tmp / "r2"));
    check_markdown_numbers(tmp / "r0");
    const auto r = json::parse(slurp(tmp / "r0" / "report.json"));
    CHECK(r["results"]["tables"].size() == 3);
    CHECK(fs::exists(tmp / "r0" / "audit_humanized.jsonl"));

    json broken = fdp;
    broken.erase("5");
    write(tmp / "broken.json", broken.dump());
    auto ob = o;
    ob[4] = "fixture_d_prime=" + (tmp / "broken.json").string();
    const auto rb = run(Command::attributes, nullptr, ob, tmp / "broken");
    CHECK(rb["status"] == "provider_error");
    CHECK(fs::exists(tmp / "broken" / "report.md"));
}
