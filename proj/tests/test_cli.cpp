#include "perpsim/csvio.hpp"
#include "perpsim/marketdata.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

using namespace perpsim;
namespace fs = std::filesystem;

namespace {

const std::string kCli = PERPSIM_CLI_PATH;

struct Workspace {
    fs::path root;
    Workspace() {
        static int counter = 0;
        root = fs::temp_directory_path() / ("perpsim-cli-test-" + std::to_string(counter++));
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Workspace() { fs::remove_all(root); }
    std::string dir(const std::string& name) const { return (root / name).string(); }
};

int run(const std::string& args, const std::string& log_name = "log.txt") {
    static Workspace logs; // keeps logs out of the working tree
    const std::string cmd =
        kCli + " " + args + " > " + logs.dir(log_name) + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) { return read_text_file(path); }

} // namespace

TEST_CASE("cli: smoke simulate run writes a manifest and validating artifacts") {
    Workspace ws;
    const std::string out = ws.dir("run");
    const int code = run("--out " + out + " --seed 7 simulate --days 3 --no-fill-log");
    REQUIRE(code == 0);
    CHECK(fs::exists(fs::path(out) / "manifest.txt"));
    const auto activity =
        parse_activity(slurp(out + "/activity_lob.csv"), SourceTag::LobCex);
    CHECK(activity.records.size() == 3);
    const auto candles = parse_candles(slurp(out + "/candles_spot.csv"));
    CHECK(candles.size() == 3);
    CHECK(slurp(out + "/manifest.txt").find("seed = 7") != std::string::npos);
}

TEST_CASE("cli: unwritable output directory fails with a clear diagnostic") {
    Workspace ws;
    const std::string blocker = ws.dir("blocker");
    write_text_file(blocker, "a plain file where a directory is needed");
    const int code = run("--out " + blocker + "/out simulate --days 1", "log-unwritable.txt");
    CHECK(code == 2);
}

TEST_CASE("cli: identical seeds give identical artifacts, different seeds differ") {
    Workspace ws;
    REQUIRE(run("--out " + ws.dir("a") + " --seed 9 simulate --days 4 --no-fill-log") == 0);
    REQUIRE(run("--out " + ws.dir("b") + " --seed 9 simulate --days 4 --no-fill-log") == 0);
    REQUIRE(run("--out " + ws.dir("c") + " --seed 10 simulate --days 4 --no-fill-log") == 0);
    for (const char* name : {"candles_spot.csv", "activity_lob.csv", "activity_vamm.csv",
                             "activity_oracle.csv"}) {
        CHECK(slurp(ws.dir("a") + "/" + name) == slurp(ws.dir("b") + "/" + name));
    }
    CHECK(slurp(ws.dir("a") + "/candles_spot.csv") != slurp(ws.dir("c") + "/candles_spot.csv"));
}

TEST_CASE("cli: analyze pipeline on simulated artifacts") {
    Workspace ws;
    const std::string run_dir = ws.dir("run");
    REQUIRE(run("--out " + run_dir + " --seed 3 simulate --days 140 --no-fill-log") == 0);

    const std::string out = ws.dir("analysis");
    const int code = run("--out " + out + " analyze --candles " + run_dir +
                         "/candles_lob.csv --activity " + run_dir +
                         "/activity_lob.csv --exchange-kind cex --model eq2 " +
                         "--m-grid 1..2 --arima-grid 1,1,1",
                         "log-analyze.txt");
    REQUIRE(code == 0);
    CHECK(fs::exists(fs::path(out) / "volatility.csv"));
    CHECK(fs::exists(fs::path(out) / "decomposed_volume.csv"));
    CHECK(fs::exists(fs::path(out) / "decomposed_volume.meta.json"));
    CHECK(fs::exists(fs::path(out) / "regression_table.csv"));
    const std::string table = slurp(out + "/regression_table.txt");
    CHECK(table.find("oi_long") == std::string::npos); // CEX table lacks long-OI rows
    CHECK(table.find("exp_oi_short") != std::string::npos);
    CHECK(table.find("Adjusted R2") != std::string::npos);
}

TEST_CASE("cli: eq3 on a VAMM artifact without leverage is a data error") {
    Workspace ws;
    const std::string run_dir = ws.dir("run");
    REQUIRE(run("--out " + run_dir + " --seed 3 simulate --days 60 --no-fill-log") == 0);
    const int code = run("--out " + ws.dir("x") + " analyze --candles " + run_dir +
                         "/candles_vamm.csv --activity " + run_dir +
                         "/activity_vamm.csv --exchange-kind vamm --model eq3",
                         "log-eq3.txt");
    CHECK(code == 2);
}

TEST_CASE("cli: granger table has the causality-table shape") {
    Workspace ws;
    const std::string run_dir = ws.dir("run");
    REQUIRE(run("--out " + run_dir + " --seed 5 simulate --days 120 --no-fill-log") == 0);
    const std::string out = ws.dir("granger");
    const int code = run("--out " + out + " granger --candles " + run_dir +
                         "/candles_oracle.csv --activity " + run_dir +
                         "/activity_oracle.csv --col volume --max-lag 15 --source-tag oracle",
                         "log-granger.txt");
    REQUIRE(code == 0);
    const std::string table = slurp(out + "/granger_table.txt");
    CHECK(table.find("H0") != std::string::npos);
    CHECK(table.find("Max-lag") != std::string::npos);
    CHECK(table.find("F-statistics") != std::string::npos);
    CHECK(table.find("p-value") != std::string::npos);
    CHECK(table.find("return does not Granger-cause volume") != std::string::npos);
    CHECK(table.find("volume does not Granger-cause return") != std::string::npos);
    CHECK(table.find("15") != std::string::npos);
}

TEST_CASE("cli: plotdata emits the liquidity histogram and volatility series") {
    Workspace ws;
    const std::string run_dir = ws.dir("run");
    REQUIRE(run("--out " + run_dir + " --seed 4 simulate --days 5 --no-fill-log") == 0);
    const std::string out = ws.dir("plots");
    REQUIRE(run("--out " + out + " plotdata --run " + run_dir, "log-plot.txt") == 0);
    // the default simulation runs a uniform pool: no tick map, header-only CSV
    CHECK(slurp(out + "/liquidity_distribution.csv") == "bucket_low,bucket_high,liquidity\n");
    CHECK(fs::exists(fs::path(out) / "volatility_spot.csv"));
    CHECK(fs::exists(fs::path(out) / "volatility_vamm.csv"));
}

TEST_CASE("cli: usage errors exit with code 1") {
    CHECK(run("frobnicate", "log-usage.txt") == 1);
    CHECK(run("analyze --no-such-flag", "log-usage2.txt") == 1);
}

TEST_CASE("cli: ingest validates, reports imputation and round-trips") {
    Workspace ws;
    const std::string csv_path = ws.dir("activity.csv");
    write_text_file(csv_path,
                    "date,volume,oi_long,oi_short,liq_long,liq_short\n"
                    "2023-01-01,10,5,5,0,0\n"
                    "2023-01-03,30,6,6,0,0\n");
    // gap rejected by default
    CHECK(run("--out " + ws.dir("gap") + " ingest --activity " + csv_path +
              " --source-tag lob-cex", "log-ingest1.txt") == 2);
    // forward-fill accepted
    const std::string out = ws.dir("filled");
    REQUIRE(run("--out " + out + " ingest --activity " + csv_path +
                " --source-tag lob-cex --ffill", "log-ingest2.txt") == 0);
    const auto series = parse_activity(slurp(out + "/activity.csv"), SourceTag::LobCex);
    CHECK(series.records.size() == 3);
}
