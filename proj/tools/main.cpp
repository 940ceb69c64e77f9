#include "commands.hpp"

#include "perpsim/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace perpsim::cli;

int main(int argc, char** argv) {
    CLI::App app("perpsim: perpetual-futures exchange simulation and volatility econometrics");
    app.require_subcommand(1);

    CommonOptions common;
    app.add_option("--out", common.out_dir, "Output directory")->capture_default_str();
    app.add_option("--seed", common.seed, "Random seed")->capture_default_str();
    app.add_option("--jobs", common.jobs, "Worker threads (0 = hardware)")->capture_default_str();

    IngestOptions ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Validate and normalize CSV or remote inputs");
    c_ingest->add_option("--candles", ingest.candles_path, "candles.csv input");
    c_ingest->add_option("--activity", ingest.activity_path, "activity.csv input");
    c_ingest->add_option("--source-tag", ingest.source_tag,
                         "lob-cex|vamm|oracle|simulated")->capture_default_str();
    c_ingest->add_flag("--ffill", ingest.forward_fill,
                       "Forward-fill date gaps (marked imputed) instead of rejecting");
    c_ingest->add_option("--feed", ingest.feed_config, "Remote feed config file");
    c_ingest->add_option("--cache", ingest.cache_dir, "Feed cache directory")
        ->capture_default_str();
    c_ingest->add_option("--start", ingest.start_date, "Feed range start (YYYY-MM-DD)");
    c_ingest->add_option("--end", ingest.end_date, "Feed range end (YYYY-MM-DD)");

    SimulateOptions simulate;
    auto* c_sim = app.add_subcommand("simulate", "Run the agent-based exchange simulation");
    c_sim->add_option("--config", simulate.config_path, "Experiment config file (key = value)");
    c_sim->add_option("--days", simulate.days_override, "Override simulated day count");
    c_sim->add_flag("--no-fill-log", simulate.no_fill_log, "Skip fill/order logs (faster, smaller)");

    AnalyzeOptions analyze;
    auto* c_ana = app.add_subcommand(
        "analyze", "Volatility, ARIMA decomposition and the volatility regressions");
    c_ana->add_option("--candles", analyze.candles_path, "candles.csv")->required();
    c_ana->add_option("--activity", analyze.activity_path, "activity.csv")->required();
    c_ana->add_option("--exchange-kind", analyze.exchange_kind, "cex|vamm|oracle")
        ->capture_default_str();
    c_ana->add_option("--model", analyze.model, "eq2|eq3")->capture_default_str();
    c_ana->add_option("--m-grid", analyze.m_grid, "Lag grid, e.g. 1..7 or 1,2,3")
        ->capture_default_str();
    c_ana->add_option("--arima-grid", analyze.arima_grid, "ARIMA bounds maxP,maxD,maxQ")
        ->capture_default_str();
    c_ana->add_option("--source-tag", analyze.source_tag,
                      "Override the activity source tag (default from --exchange-kind)");
    c_ana->add_flag("--robust-se", analyze.robust_se, "Heteroskedasticity-robust (HC1) errors");
    c_ana->add_flag("--granger", analyze.granger, "Also run the Granger causality subflow");
    c_ana->add_option("--max-lag", analyze.max_lag, "Granger max lag")->capture_default_str();
    c_ana->add_option("--granger-col", analyze.granger_col, "Activity column for Granger")
        ->capture_default_str();
    c_ana->add_flag("--ffill", analyze.forward_fill, "Forward-fill activity date gaps");

    GrangerOptions granger;
    auto* c_gr = app.add_subcommand("granger",
                                    "Granger causality between returns and an activity column");
    c_gr->add_option("--candles", granger.candles_path, "candles.csv")->required();
    c_gr->add_option("--activity", granger.activity_path, "activity.csv")->required();
    c_gr->add_option("--col", granger.column, "Activity column")->capture_default_str();
    c_gr->add_option("--max-lag", granger.max_lag, "Max lag")->capture_default_str();
    c_gr->add_option("--source-tag", granger.source_tag, "Activity source tag")
        ->capture_default_str();
    c_gr->add_flag("--ffill", granger.forward_fill, "Forward-fill activity date gaps");

    PlotdataOptions plotdata;
    auto* c_plot = app.add_subcommand("plotdata", "Plot-ready CSVs from a simulation run");
    c_plot->add_option("--run", plotdata.run_dir, "simulate output directory")->required();
    c_plot->add_option("--buckets", plotdata.buckets, "Histogram bucket count")
        ->capture_default_str();
    c_plot->add_option("--pmin", plotdata.price_min, "Histogram lower price edge");
    c_plot->add_option("--pmax", plotdata.price_max, "Histogram upper price edge");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (c_ingest->parsed()) return cmd_ingest(common, ingest);
        if (c_sim->parsed()) {
            simulate.seed_given = app.count("--seed") > 0;
            return cmd_simulate(common, simulate);
        }
        if (c_ana->parsed()) return cmd_analyze(common, analyze);
        if (c_gr->parsed()) return cmd_granger(common, granger);
        if (c_plot->parsed()) return cmd_plotdata(common, plotdata);
    } catch (const perpsim::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const perpsim::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
