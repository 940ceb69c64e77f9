#include "commands.hpp"

#include "perpsim/arima.hpp"
#include "perpsim/csvio.hpp"
#include "perpsim/errors.hpp"
#include "perpsim/experiment.hpp"
#include "perpsim/feed.hpp"
#include "perpsim/granger.hpp"
#include "perpsim/marketdata.hpp"
#include "perpsim/parallel.hpp"
#include "perpsim/vamm.hpp"
#include "perpsim/volatility.hpp"
#include "perpsim/volmodel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace perpsim::cli {
namespace {

namespace fs = std::filesystem;

std::string join_out(const CommonOptions& common, const std::string& name) {
    return (fs::path(common.out_dir) / name).string();
}

void ensure_out_dir(const CommonOptions& common) {
    std::error_code ec;
    fs::create_directories(common.out_dir, ec);
    if (ec) throw DataError("cannot create output directory " + common.out_dir);
    // probe writability early so failures are one clear diagnostic
    const std::string probe = join_out(common, ".write-probe");
    write_text_file(probe, "ok");
    fs::remove(probe);
}

void write_manifest(const CommonOptions& common, const std::string& subcommand,
                    const std::vector<std::pair<std::string, std::string>>& options) {
    std::ostringstream ss;
    ss << "tool = perpsim 0.1.0\n";
    ss << "subcommand = " << subcommand << '\n';
    ss << "seed = " << common.seed << '\n';
    ss << "jobs = " << common.jobs << '\n';
    for (const auto& [key, value] : options) ss << key << " = " << value << '\n';
    write_text_file(join_out(common, "manifest.txt"), ss.str());
}

std::vector<int> parse_m_grid(const std::string& text) {
    std::vector<int> grid;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(text.substr(0, dots));
        const int hi = std::stoi(text.substr(dots + 2));
        for (int m = lo; m <= hi; ++m) grid.push_back(m);
    } else {
        for (const auto& tok : split_csv_line(text))
            if (!tok.empty()) grid.push_back(std::stoi(tok));
    }
    if (grid.empty()) throw DataError("empty m grid '" + text + "'");
    return grid;
}

ArimaGrid parse_arima_grid(const std::string& text) {
    const auto parts = split_csv_line(text);
    if (parts.size() != 3)
        throw DataError("ARIMA grid must be 'maxP,maxD,maxQ', got '" + text + "'");
    ArimaGrid grid;
    grid.max_p = std::stoi(parts[0]);
    grid.max_d = std::stoi(parts[1]);
    grid.max_q = std::stoi(parts[2]);
    return grid;
}

struct LoadedInputs {
    std::vector<Candle> candles;
    ActivitySeries activity;
};

LoadedInputs load_inputs(const std::string& candles_path, const std::string& activity_path,
                         SourceTag tag, bool ffill) {
    LoadedInputs in;
    in.candles = parse_candles(read_text_file(candles_path));
    in.activity = parse_activity(read_text_file(activity_path), tag,
                                 ffill ? GapPolicy::ForwardFill : GapPolicy::Reject);
    return in;
}

void align_dates(const std::vector<Candle>& candles, const ActivitySeries& activity) {
    if (candles.size() != activity.records.size())
        throw DataError("candles (" + std::to_string(candles.size()) + " rows) and activity (" +
                        std::to_string(activity.records.size()) + " rows) cover different spans");
    for (std::size_t i = 0; i < candles.size(); ++i)
        if (candles[i].date != activity.records[i].date)
            throw DataError("date misalignment at row " + std::to_string(i) + ": candle " +
                            candles[i].date.to_string() + " vs activity " +
                            activity.records[i].date.to_string());
}

void write_decomposition(const DecomposedSet& set, const CommonOptions& common) {
    for (const auto& [name, series] : set.series) {
        std::ostringstream csv;
        csv << "date,expected,unexpected,warmup_flag\n";
        for (std::size_t t = 0; t < set.dates.size(); ++t)
            csv << set.dates[t].to_string() << ',' << format_double(series.expected[t]) << ','
                << format_double(series.unexpected[t]) << ',' << (series.warmup[t] ? 1 : 0)
                << '\n';
        write_text_file(join_out(common, "decomposed_" + name + ".csv"), csv.str());
        nlohmann::json meta = {{"series", name},
                               {"order_p", series.order.p},
                               {"order_d", series.order.d},
                               {"order_q", series.order.q}};
        write_text_file(join_out(common, "decomposed_" + name + ".meta.json"),
                        meta.dump(2) + "\n");
    }
}

} // namespace

int cmd_ingest(const CommonOptions& common, const IngestOptions& opt) {
    ensure_out_dir(common);
    const SourceTag tag = source_tag_from_string(opt.source_tag);

    std::vector<Candle> candles;
    ActivitySeries activity;
    bool have_candles = false, have_activity = false;

    if (!opt.feed_config.empty()) {
        if (opt.start_date.empty() || opt.end_date.empty())
            throw DataError("--feed needs --start and --end dates");
        FeedClient client(opt.cache_dir);
        const FeedConfig feed = FeedConfig::load(opt.feed_config);
        const FeedSeries series = client.fetch(feed, Date::from_string(opt.start_date),
                                               Date::from_string(opt.end_date));
        if (std::holds_alternative<std::vector<Candle>>(series)) {
            candles = std::get<std::vector<Candle>>(series);
            have_candles = true;
        } else {
            activity = std::get<ActivitySeries>(series);
            have_activity = true;
        }
        std::cout << "feed fetch: " << client.network_calls() << " network call(s), cache at "
                  << client.cache_path(feed, Date::from_string(opt.start_date),
                                       Date::from_string(opt.end_date))
                  << '\n';
    }
    if (!opt.candles_path.empty()) {
        candles = parse_candles(read_text_file(opt.candles_path));
        have_candles = true;
    }
    if (!opt.activity_path.empty()) {
        activity = parse_activity(read_text_file(opt.activity_path), tag,
                                  opt.forward_fill ? GapPolicy::ForwardFill : GapPolicy::Reject);
        have_activity = true;
    }
    if (!have_candles && !have_activity)
        throw DataError("nothing to ingest: give --candles, --activity or --feed");

    if (have_candles) {
        write_text_file(join_out(common, "candles.csv"), serialize_candles(candles));
        std::cout << "candles: " << candles.size() << " rows -> "
                  << join_out(common, "candles.csv") << '\n';
    }
    if (have_activity) {
        write_text_file(join_out(common, "activity.csv"), serialize_activity(activity));
        std::size_t imputed = 0;
        for (const auto& r : activity.records) imputed += r.imputed ? 1 : 0;
        std::cout << "activity: " << activity.records.size() << " rows (" << imputed
                  << " imputed) -> " << join_out(common, "activity.csv") << '\n';
    }
    write_manifest(common, "ingest",
                   {{"candles", opt.candles_path},
                    {"activity", opt.activity_path},
                    {"source_tag", opt.source_tag},
                    {"forward_fill", opt.forward_fill ? "true" : "false"},
                    {"feed_config", opt.feed_config},
                    {"range", opt.start_date + ".." + opt.end_date}});
    return kExitOk;
}

int cmd_simulate(const CommonOptions& common, const SimulateOptions& opt) {
    ensure_out_dir(common);
    ExperimentConfig config;
    if (!opt.config_path.empty())
        config = ExperimentConfig::from_key_values(KeyValueConfig::load(opt.config_path));
    if (opt.seed_given) config.seed = common.seed;
    if (opt.days_override > 0) config.days = opt.days_override;
    if (opt.no_fill_log) config.keep_fill_log = false;

    const ExperimentResult result = run_experiment(config);
    write_experiment_artifacts(result, common.out_dir);
    // the experiment manifest is the reproducibility contract; keep it as-is
    std::cout << "simulated " << config.days << " day(s), engines:";
    for (const auto& run : result.engines)
        std::cout << ' ' << to_string(run.kind) << "(fills=" << run.fills.size()
                  << ", liq=" << run.liquidation_count << ")";
    std::cout << "\nartifacts in " << common.out_dir << '\n';
    return kExitOk;
}

int cmd_analyze(const CommonOptions& common, const AnalyzeOptions& opt) {
    ensure_out_dir(common);
    const ExchangeKind kind = exchange_kind_from_string(opt.exchange_kind);
    const ModelForm form = model_form_from_string(opt.model);
    const std::string tag_name =
        !opt.source_tag.empty() ? opt.source_tag
                                : (kind == ExchangeKind::Cex ? "lob-cex" : opt.exchange_kind);
    const LoadedInputs in = load_inputs(opt.candles_path, opt.activity_path,
                                        source_tag_from_string(tag_name), opt.forward_fill);
    align_dates(in.candles, in.activity);

    if (form == ModelForm::WithLeverage && !in.activity.has_leverage())
        throw DataError("model eq3 needs leverage columns, but this activity series has none "
                        "(cross-margin venues emit no per-position leverage)");

    const auto vol = volatility_series(in.candles, RadicandPolicy::ClampToZero);
    write_text_file(join_out(common, "volatility.csv"), serialize_volatility(vol));

    const ArimaGrid grid = parse_arima_grid(opt.arima_grid);
    const DecomposedSet set = decompose_activity(in.activity, grid, common.jobs);
    write_decomposition(set, common);

    const std::vector<int> m_grid = parse_m_grid(opt.m_grid);
    const RegressionResult fit =
        fit_volatility_model(vol, set, kind, form, m_grid, opt.robust_se);

    const std::string title = "Volatility regression (" + opt.model + ", " + opt.exchange_kind +
                              ", m=" + std::to_string(fit.lag_count) + ")";
    write_text_file(join_out(common, "regression_table.txt"),
                    render_regression_table_text(fit, title));
    write_text_file(join_out(common, "regression_table.csv"), render_regression_table_csv(fit));
    std::cout << render_regression_table_text(fit, title);

    if (opt.granger) {
        std::vector<double> returns;
        returns.reserve(in.candles.size());
        for (const auto& c : in.candles) returns.push_back(log_return(c));
        const std::vector<double> col = in.activity.column(opt.granger_col);
        const auto rows = granger_both_directions(returns, col, opt.max_lag, "return",
                                                  opt.granger_col);
        const std::string table = render_granger_table(rows);
        write_text_file(join_out(common, "granger_table.txt"), table);
        std::cout << table;
    }

    write_manifest(common, "analyze",
                   {{"candles", opt.candles_path},
                    {"activity", opt.activity_path},
                    {"exchange_kind", opt.exchange_kind},
                    {"model", opt.model},
                    {"m_grid", opt.m_grid},
                    {"arima_grid", opt.arima_grid},
                    {"robust_se", opt.robust_se ? "true" : "false"},
                    {"granger", opt.granger ? "true" : "false"},
                    {"max_lag", std::to_string(opt.max_lag)},
                    {"granger_col", opt.granger_col}});
    return kExitOk;
}

int cmd_granger(const CommonOptions& common, const GrangerOptions& opt) {
    ensure_out_dir(common);
    const LoadedInputs in = load_inputs(opt.candles_path, opt.activity_path,
                                        source_tag_from_string(opt.source_tag), opt.forward_fill);
    align_dates(in.candles, in.activity);

    std::vector<double> returns;
    returns.reserve(in.candles.size());
    for (const auto& c : in.candles) returns.push_back(log_return(c));
    const std::vector<double> col = in.activity.column(opt.column);

    const auto rows = granger_both_directions(returns, col, opt.max_lag, "return", opt.column);
    const std::string table = render_granger_table(rows);
    write_text_file(join_out(common, "granger_table.txt"), table);
    std::cout << table;

    write_manifest(common, "granger",
                   {{"candles", opt.candles_path},
                    {"activity", opt.activity_path},
                    {"column", opt.column},
                    {"max_lag", std::to_string(opt.max_lag)}});
    return kExitOk;
}

int cmd_plotdata(const CommonOptions& common, const PlotdataOptions& opt) {
    ensure_out_dir(common);
    const fs::path run(opt.run_dir);
    const fs::path positions_file = run / "pool_positions.json";
    if (!fs::exists(positions_file))
        throw DataError("no VAMM run artifact at " + positions_file.string() +
                        " (run `simulate` with the vamm engine first)");

    const nlohmann::json doc = nlohmann::json::parse(read_text_file(positions_file.string()));
    struct Pos {
        double lo, hi, liq;
    };
    std::vector<Pos> active;
    for (const auto& p : doc)
        if (p.value("active", false))
            active.push_back({p.at("lower_price").get<double>(),
                              p.at("upper_price").get<double>(),
                              p.at("liquidity").get<double>()});

    std::ostringstream csv;
    csv << "bucket_low,bucket_high,liquidity\n";
    if (!active.empty()) {
        double lo = opt.price_min, hi = opt.price_max;
        if (lo <= 0 || hi <= lo) {
            lo = active.front().lo;
            hi = active.front().hi;
            for (const auto& p : active) {
                lo = std::min(lo, p.lo);
                hi = std::max(hi, p.hi);
            }
        }
        const int buckets = std::max(1, opt.buckets);
        for (int b = 0; b < buckets; ++b) {
            const double b_lo = lo + (hi - lo) * b / buckets;
            const double b_hi = lo + (hi - lo) * (b + 1) / buckets;
            const double mid = 0.5 * (b_lo + b_hi);
            double total = 0;
            for (const auto& p : active)
                if (mid >= p.lo && mid < p.hi) total += p.liq;
            csv << format_double(b_lo) << ',' << format_double(b_hi) << ','
                << format_double(total) << '\n';
        }
    }
    write_text_file(join_out(common, "liquidity_distribution.csv"), csv.str());

    // volatility series of every candle artifact in the run directory
    for (const auto& entry : fs::directory_iterator(run)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("candles_", 0) != 0 || entry.path().extension() != ".csv") continue;
        const auto candles = parse_candles(read_text_file(entry.path().string()));
        const auto vol = volatility_series(candles, RadicandPolicy::ClampToZero);
        const std::string out_name = "volatility_" + name.substr(8);
        write_text_file(join_out(common, out_name), serialize_volatility(vol));
    }

    write_manifest(common, "plotdata",
                   {{"run", opt.run_dir},
                    {"buckets", std::to_string(opt.buckets)}});
    std::cout << "plot data in " << common.out_dir << '\n';
    return kExitOk;
}

} // namespace perpsim::cli
