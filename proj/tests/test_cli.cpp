#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "growth/io.hpp"

#ifndef GROWTH_CLI_PATH
#error "GROWTH_CLI_PATH must point at the command-line binary"
#endif

using namespace growth;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("growth_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

std::string slurp(const std::string& path) {
    if (!fs::exists(path)) return "";
    return read_file(path);
}

RunResult run(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const std::string tag = std::to_string(::getpid()) + "_" +
                            std::to_string(counter++);
    const std::string out = (fs::temp_directory_path() /
                             ("growth_cli_out_" + tag)).string();
    const std::string err = (fs::temp_directory_path() /
                             ("growth_cli_err_" + tag)).string();
    const std::string cmd = env + (env.empty() ? "" : " ") + GROWTH_CLI_PATH +
                            " " + args + " >" + out + " 2>" + err;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    fs::remove(out);
    fs::remove(err);
    return r;
}

long line_count(const std::string& s) {
    long n = 0;
    for (char ch : s)
        if (ch == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("catalog lists every model in table and JSON form") {
    const RunResult table = run("catalog");
    CHECK(table.code == 0);
    CHECK(table.out.find("Logistic") != std::string::npos);
    CHECK(table.out.find("ThetaLogistic") != std::string::npos);

    const RunResult json = run("catalog --format json");
    CHECK(json.code == 0);
    const nlohmann::json j = nlohmann::json::parse(json.out);
    REQUIRE(j.is_array());
    CHECK(j.size() == 48);
    CHECK(j.at(0).contains("parent"));
    CHECK(j.at(0).contains("variation"));
}

TEST_CASE("simulate writes reproducible trajectories") {
    TempDir a("sim_a"), b("sim_b");
    const std::string plan =
        "simulate --parent Logistic --variation ConstantParams "
        "--r0 0.3 -K 100 --x0 10 -q 12 -n 5 --sigma2 0.001 --rho 0.1 "
        "--seed 42";
    const RunResult ra = run(plan + " --out-dir " + a.path.string());
    REQUIRE(ra.code == 0);
    CHECK(fs::exists(a.file("trajectories.csv")));
    CHECK(fs::exists(a.file("plan.json")));

    const RunResult rb = run(plan + " --out-dir " + b.path.string());
    REQUIRE(rb.code == 0);
    CHECK(slurp(a.file("trajectories.csv")) ==
          slurp(b.file("trajectories.csv")));

    // The seed can come from the environment instead of the flag.
    TempDir c("sim_c");
    const std::string noseed =
        "simulate --parent Logistic --variation ConstantParams "
        "--r0 0.3 -K 100 --x0 10 -q 12 -n 5 --sigma2 0.001 --rho 0.1";
    const RunResult rc =
        run(noseed + " --out-dir " + c.path.string(), "GROWTH_SEED=42");
    REQUIRE(rc.code == 0);
    CHECK(slurp(a.file("trajectories.csv")) ==
          slurp(c.file("trajectories.csv")));
}

TEST_CASE("estimation and selection run end to end on simulated data") {
    TempDir dir("pipeline");
    const std::string sim =
        "simulate --parent Logistic --variation ConstantParams "
        "--r0 0.3 -K 100 --x0 10 -q 15 -n 200 --sigma2 0.001 --rho 0.1 "
        "--seed 7 --out-dir " + dir.path.string();
    REQUIRE(run(sim).code == 0);
    const std::string data = dir.file("trajectories.csv");

    SUBCASE("interval profile") {
        const RunResult r = run("isrp --input " + data +
                                " --parent Logistic --target r --out-dir " +
                                dir.path.string());
        REQUIRE(r.code == 0);
        const std::string csv = slurp(dir.file("isrp.csv"));
        CHECK(csv.rfind("j,t,estimate,", 0) == 0);
        CHECK(line_count(csv) == 1 + 13);  // q - 2 windows
    }

    SUBCASE("model selection") {
        const RunResult r = run("select --input " + data +
                                " --parent Logistic --out-dir " +
                                dir.path.string());
        REQUIRE(r.code == 0);
        const nlohmann::json j =
            nlohmann::json::parse(slurp(dir.file("selection.json")));
        CHECK(j.at("chosen").at("variation").get<std::string>() ==
              "ConstantParams");
        CHECK(fs::exists(dir.file("selection.txt")));
        CHECK(fs::exists(dir.file("isrp_points.csv")));
        CHECK(fs::exists(dir.file("model_curves.csv")));
        // The narrative also lands on stdout for interactive use.
        CHECK(r.out.find("verdict") != std::string::npos);
    }

    SUBCASE("single-model fit") {
        const RunResult r = run("fit --input " + data +
                                " --parent Logistic "
                                "--variation ConstantParams --out-dir " +
                                dir.path.string());
        REQUIRE(r.code == 0);
        const nlohmann::json j =
            nlohmann::json::parse(slurp(dir.file("fit.json")));
        CHECK(j.at("converged").get<bool>());
        const double r_hat = j.at("estimates").at("r0").get<double>();
        CHECK(r_hat == doctest::Approx(0.3).epsilon(0.1));
    }
}

TEST_CASE("config file values load and flags override them") {
    TempDir dir("config");
    const std::string cfg = dir.file("run.json");
    write_file(cfg, R"({
  "parent": "Logistic",
  "variation": "ConstantParams",
  "r0": 0.3, "K": 100, "x0": 10,
  "q": 10, "n": 3, "sigma2": 0.001, "rho": 0.1, "seed": 5
})");
    TempDir a("cfg_a"), b("cfg_b"), c("cfg_c");
    REQUIRE(run("simulate --config " + cfg + " --out-dir " +
                a.path.string()).code == 0);
    // Flag overrides the file's seed: output must differ.
    REQUIRE(run("simulate --config " + cfg + " --seed 6 --out-dir " +
                b.path.string()).code == 0);
    CHECK(slurp(a.file("trajectories.csv")) !=
          slurp(b.file("trajectories.csv")));
    // Same override twice is stable.
    REQUIRE(run("simulate --config " + cfg + " --seed 6 --out-dir " +
                c.path.string()).code == 0);
    CHECK(slurp(b.file("trajectories.csv")) ==
          slurp(c.file("trajectories.csv")));

    // Unknown keys are configuration errors.
    const std::string bad = dir.file("bad.json");
    write_file(bad, R"({"paren": "Logistic"})");
    const RunResult r = run("simulate --config " + bad);
    CHECK(r.code == 2);
}

TEST_CASE("failures exit with the documented codes and one-line messages") {
    SUBCASE("missing subcommand is a usage error") {
        CHECK(run("").code == 2);
    }
    SUBCASE("unknown flag is a usage error") {
        CHECK(run("catalog --no-such-flag").code == 2);
    }
    SUBCASE("unknown parent name is a configuration error") {
        const RunResult r = run("simulate --parent Quadratic");
        CHECK(r.code == 2);
        CHECK(r.err.rfind("error: config:", 0) == 0);
        CHECK(line_count(r.err) == 1);
    }
    SUBCASE("missing input file is a data error") {
        const RunResult r =
            run("isrp --input /nonexistent.csv --parent Logistic");
        CHECK(r.code == 3);
        CHECK(r.err.rfind("error: data:", 0) == 0);
        CHECK(line_count(r.err) == 1);
    }
    SUBCASE("invalid plan values are configuration errors") {
        const RunResult r =
            run("simulate --parent Logistic --variation ConstantParams "
                "--r0 0.3 -K 100 --x0 10 -q 12 --rho 1.5");
        CHECK(r.code == 2);
        CHECK(line_count(r.err) == 1);
    }
    SUBCASE("failed runs leave no partial outputs") {
        TempDir dir("fail");
        const RunResult r =
            run("isrp --input /nonexistent.csv --parent Logistic "
                "--out-dir " + dir.path.string());
        CHECK(r.code == 3);
        bool any = false;
        for (const auto& e : fs::directory_iterator(dir.path)) {
            (void)e;
            any = true;
        }
        CHECK(!any);
    }
}

TEST_CASE("replication study emits summary and samples") {
    TempDir dir("reps");
    const RunResult r = run(
        "isrp --parent Logistic --variation ConstantParams --target r "
        "--r0 0.3 -K 100 --x0 10 -q 10 -n 20 --sigma2 0.001 --rho 0.1 "
        "--replications 8 --seed 3 --threads 2 --out-dir " +
        dir.path.string());
    REQUIRE(r.code == 0);
    const std::string summary = slurp(dir.file("isrp_summary.csv"));
    CHECK(line_count(summary) == 1 + 8);  // q - 2 intervals
    const std::string samples = slurp(dir.file("isrp_samples.csv"));
    CHECK(line_count(samples) == 1 + 8 * 8);
    CHECK(fs::exists(dir.file("plan.json")));
}

TEST_CASE("bootstrap subcommand reports wins per candidate") {
    TempDir dir("boot");
    const std::string sim =
        "simulate --parent Logistic --variation ConstantParams "
        "--r0 0.3 -K 100 --x0 10 -q 12 -n 30 --sigma2 0.01 --rho 0.1 "
        "--seed 9 --out-dir " + dir.path.string();
    REQUIRE(run(sim).code == 0);

    const RunResult r = run(
        "bootstrap --input " + dir.file("trajectories.csv") +
        " --candidates Logistic/ConstantParams,"
        "ConfinedExponential/ConstantParams -B 20 --seed 11 --out-dir " +
        dir.path.string());
    REQUIRE(r.code == 0);
    const nlohmann::json j =
        nlohmann::json::parse(slurp(dir.file("bootstrap.json")));
    CHECK(j.at("B").get<long>() == 20);
    const auto& wins = j.at("wins");
    REQUIRE(wins.size() == 2);
    const long total = wins.at("Logistic/ConstantParams").get<long>() +
                       wins.at("ConfinedExponential/ConstantParams").get<long>();
    CHECK(total <= 20);
    CHECK(total > 0);
    CHECK(fs::exists(dir.file("bootstrap_samples.csv")));
}
