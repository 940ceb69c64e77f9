#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace perpsim::cli {

// stable exit-code contract
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct CommonOptions {
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    unsigned jobs = 0; // 0 = hardware concurrency
};

struct IngestOptions {
    std::string candles_path;
    std::string activity_path;
    std::string source_tag = "simulated";
    bool forward_fill = false;
    std::string feed_config;
    std::string cache_dir = "feed-cache";
    std::string start_date;
    std::string end_date;
};

struct SimulateOptions {
    std::string config_path;
    int days_override = 0; // 0 = from config
    bool seed_given = false;
    bool no_fill_log = false;
};

struct AnalyzeOptions {
    std::string candles_path;
    std::string activity_path;
    std::string exchange_kind = "cex";
    std::string model = "eq2";
    std::string m_grid = "1..7";
    std::string arima_grid = "2,1,2";
    std::string source_tag;
    bool robust_se = false;
    bool granger = false;
    int max_lag = 15;
    std::string granger_col = "volume";
    bool forward_fill = false;
};

struct GrangerOptions {
    std::string candles_path;
    std::string activity_path;
    std::string column = "volume";
    int max_lag = 15;
    std::string source_tag = "simulated";
    bool forward_fill = false;
};

struct PlotdataOptions {
    std::string run_dir;
    int buckets = 50;
    double price_min = 0; // 0 = auto from positions
    double price_max = 0;
};

int cmd_ingest(const CommonOptions& common, const IngestOptions& opt);
int cmd_simulate(const CommonOptions& common, const SimulateOptions& opt);
int cmd_analyze(const CommonOptions& common, const AnalyzeOptions& opt);
int cmd_granger(const CommonOptions& common, const GrangerOptions& opt);
int cmd_plotdata(const CommonOptions& common, const PlotdataOptions& opt);

} // namespace perpsim::cli
