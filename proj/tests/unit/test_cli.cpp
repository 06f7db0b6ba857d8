#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using gridzones::cli::run_command;

namespace {

std::string data(const std::string& name) { return std::string(GRIDZONES_DATA_DIR) + "/" + name; }

struct Run {
    int code = 0;
    std::string out, err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_command(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Fresh scratch directory, removed on scope exit.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("gridzones_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

}  // namespace

TEST_CASE("opf run prints the dispatch") {
    auto r = run({"opf", "run", "--case", data("two_bus.json"), "--no-limits"});
    REQUIRE(r.code == 0);
    auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["nodal_prices"] == nlohmann::json::array({10.0, 10.0}));

    r = run({"opf", "run", "--case", data("two_bus.json")});
    REQUIRE(r.code == 0);
    doc = nlohmann::json::parse(r.out);
    CHECK(doc["nodal_prices"] == nlohmann::json::array({10.0, 30.0}));
    CHECK(doc["binding_lines"] == nlohmann::json::array({0}));
}

TEST_CASE("exit codes") {
    CHECK(run({}).code == 1);
    CHECK(run({"opf"}).code == 1);
    CHECK(run({"opf", "run"}).code == 1);  // no case
    CHECK(run({"opf", "run", "--case", data("does_not_exist.m")}).code == 1);
    CHECK(run({"opf", "run", "--case", data("two_bus.json"), "--bogus"}).code == 1);
    CHECK(run({"ptdf", "dump", "--case", data("two_bus.json"), "--reference-bus", "7"}).code == 1);
    CHECK(run({"zones", "compare", "--case", data("two_bus.json"), "--max-k", "9"}).code == 1);
    CHECK(run({"--help"}).code == 0);

    Scratch tmp("exit");
    {
        std::ofstream f(tmp / "heavy.json");
        f << R"({"buses":[{"id":0,"demand":0},{"id":1,"demand":150}],
                 "branches":[{"id":0,"from_bus":0,"to_bus":1,"reactance":0.1,"flow_limit":50}],
                 "generators":[{"bus":0,"marginal_cost":10,"p_max":200},{"bus":1,"marginal_cost":30,"p_max":50}]})";
    }
    const auto infeasible = run({"opf", "run", "--case", tmp / "heavy.json"});
    CHECK(infeasible.code == 2);
    CHECK(nlohmann::json::parse(infeasible.out)["feasible"] == false);
    CHECK(run({"zones", "compare", "--case", tmp / "heavy.json", "--max-k", "2", "--count", "3", "--out-dir",
               tmp / "out"})
              .code == 2);
}

TEST_CASE("ptdf dump") {
    auto r = run({"ptdf", "dump", "--case", data("two_bus.json"), "--reference-bus", "1"});
    REQUIRE(r.code == 0);
    CHECK(r.out == "branch,A,B\n0,1,0\n");
    r = run({"ptdf", "dump", "--case", data("two_bus.json"), "--generalized"});
    REQUIRE(r.code == 0);
    CHECK(r.out == "branch,A,B\n0,0.5,-0.5\n");
}

TEST_CASE("scenario gen is reproducible and readable back") {
    Scratch tmp("scen");
    const std::vector<std::string> args{"scenario", "gen", "--case", data("case30_wind.m"), "--count", "15",
                                        "--seed", "9"};
    const auto a = run(args);
    const auto b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 16);

    auto to_file = args;
    to_file.insert(to_file.end(), {"-o", tmp / "s.csv"});
    REQUIRE(run(to_file).code == 0);
    CHECK(slurp(tmp / "s.csv") == a.out);

    const auto zones = run({"zones", "lmp", "--case", data("case30_wind.m"), "--scenarios-csv", tmp / "s.csv",
                            "--max-k", "3", "--out-dir", tmp / "z"});
    CHECK(zones.code == 0);
    CHECK(fs::exists(tmp / "z/lmp.json"));
    CHECK(fs::exists(tmp / "z/report.csv"));
    CHECK(fs::exists(tmp / "z/lmp.dot"));

    CHECK(run({"scenario", "gen", "--case", data("case30_wind.m"), "--cut-in", "20"}).code == 1);
}

TEST_CASE("zones compare writes every format deterministically") {
    Scratch tmp("cmp");
    auto args = [&](const std::string& dir, const std::string& threads) {
        return std::vector<std::string>{"zones", "compare", "--case", data("case30_wind.m"), "--count", "10",
                                        "--max-k", "4", "--out-dir", tmp / dir, "-j", threads};
    };
    const auto one = run(args("a", "1"));
    const auto four = run(args("b", "4"));
    REQUIRE(one.code == 0);
    REQUIRE(four.code == 0);
    CHECK(one.out == four.out);
    for (const char* f : {"comparison.json", "report.csv", "lmp.dot", "ptdf.dot"}) {
        CAPTURE(f);
        REQUIRE(fs::exists(tmp.dir / "a" / f));
        CHECK(slurp(tmp.dir / "a" / f) == slurp(tmp.dir / "b" / f));
    }
    const auto doc = nlohmann::json::parse(slurp(tmp.dir / "a/comparison.json"));
    CHECK(doc["table"].size() == 2);

    const auto csv = slurp(tmp.dir / "a/report.csv");
    CHECK(csv.rfind("method,k,", 0) == 0);
    CHECK(csv.find("\nlmp_consensus,1,") != std::string::npos);
    CHECK(csv.find("\ncongestion_contribution,1,") != std::string::npos);

    const auto json_only = run({"zones", "ptdf", "--case", data("case30_wind.m"), "--count", "5", "--max-k", "2",
                                "--out-dir", tmp / "c", "--formats", "json"});
    CHECK(json_only.code == 0);
    CHECK(fs::exists(tmp / "c/ptdf.json"));
    CHECK_FALSE(fs::exists(tmp / "c/report.csv"));
    CHECK_FALSE(fs::exists(tmp / "c/ptdf.dot"));
}

TEST_CASE("config files in TOML and JSON") {
    Scratch tmp("cfg");
    {
        std::ofstream toml(tmp / "run.toml");
        toml << "case = \"" << data("two_bus.json") << "\"\nno-limits = true\n";
        std::ofstream json(tmp / "run.json");
        json << R"({"case": ")" << data("two_bus.json") << R"(", "no-limits": true})";
        std::ofstream bad(tmp / "bad.json");
        bad << "{ not json";
    }
    for (const char* file : {"run.toml", "run.json"}) {
        CAPTURE(file);
        const auto r = run({"opf", "run", "--config", tmp / file});
        REQUIRE(r.code == 0);
        CHECK(nlohmann::json::parse(r.out)["nodal_prices"] == nlohmann::json::array({10.0, 10.0}));
    }
    // Flags override the file.
    {
        std::ofstream f(tmp / "limits.json");
        f << R"({"case": ")" << data("two_bus.json") << R"(", "max-k": 5, "count": 2})";
    }
    CHECK(run({"zones", "lmp", "--config", tmp / "limits.json", "--out-dir", tmp / "o"}).code == 1);
    CHECK(run({"zones", "lmp", "--config", tmp / "limits.json", "--max-k", "2", "--out-dir", tmp / "o"}).code == 0);
    CHECK(run({"opf", "run", "--config", tmp / "bad.json"}).code == 1);
}
