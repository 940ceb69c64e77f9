#include "perpsim/experiment.hpp"

#include "perpsim/csvio.hpp"
#include "perpsim/errors.hpp"
#include "perpsim/lob_exchange.hpp"
#include "perpsim/oracle_exchange.hpp"
#include "perpsim/vamm_exchange.hpp"
#include "perpsim/volatility.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <memory>
#include <sstream>

namespace perpsim {
namespace {

constexpr const char* kVersionStamp = "perpsim 0.1.0";

TraderSpec* find_spec(std::vector<TraderSpec>& specs, AgentClass cls) {
    for (auto& s : specs)
        if (s.cls == cls) return &s;
    return nullptr;
}

SourceTag source_for(EngineKind kind) {
    switch (kind) {
        case EngineKind::Lob: return SourceTag::LobCex;
        case EngineKind::Oracle: return SourceTag::Oracle;
        case EngineKind::Vamm: return SourceTag::Vamm;
    }
    return SourceTag::Simulated;
}

} // namespace

void ExperimentConfig::validate() const {
    if (days < 1) throw DataError("experiment: days must be >= 1");
    if (engines.empty()) throw DataError("experiment: no engines configured");
    if (process.steps_per_day < 1) throw DataError("experiment: steps_per_day must be >= 1");
    if (trailing_vol_window < 1) throw DataError("experiment: trailing_vol_window must be >= 1");
    for (const auto& spec : population) {
        if (spec.count < 0) throw DataError("experiment: negative population count");
        if (spec.overreaction < 1)
            throw DataError("experiment: overreaction multiplier must be >= 1");
    }
}

ExperimentConfig ExperimentConfig::from_key_values(const KeyValueConfig& kv) {
    ExperimentConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(kv.get_int("seed", 1));
    cfg.days = static_cast<int>(kv.get_int("days", cfg.days));
    cfg.start_date = Date::from_string(kv.get_string("start_date", cfg.start_date.to_string()));
    cfg.trailing_vol_window =
        static_cast<int>(kv.get_int("trailing_vol_window", cfg.trailing_vol_window));
    cfg.regime_vol_window =
        static_cast<int>(kv.get_int("regime_vol_window", cfg.regime_vol_window));
    cfg.reference_vol = kv.get_double("reference_vol", cfg.reference_vol);
    cfg.keep_fill_log = kv.get_bool("keep_fill_log", cfg.keep_fill_log);

    if (kv.has("engines")) {
        cfg.engines.clear();
        std::string list = kv.get_string("engines", "");
        for (auto& token : split_csv_line(list))
            if (!token.empty()) cfg.engines.push_back(engine_kind_from_string(token));
    }

    cfg.process.kind =
        price_process_kind_from_string(kv.get_string("process.kind", "gbm"));
    cfg.process.drift_per_year = kv.get_double("process.drift", cfg.process.drift_per_year);
    cfg.process.vol_per_sqrt_year = kv.get_double("process.vol", cfg.process.vol_per_sqrt_year);
    cfg.process.jump_intensity_per_year =
        kv.get_double("process.jump_intensity", cfg.process.jump_intensity_per_year);
    cfg.process.jump_log_sd = kv.get_double("process.jump_log_sd", cfg.process.jump_log_sd);
    cfg.process.vol_persistence =
        kv.get_double("process.vol_persistence", cfg.process.vol_persistence);
    cfg.process.vol_of_vol = kv.get_double("process.vol_of_vol", cfg.process.vol_of_vol);
    cfg.process.steps_per_day =
        static_cast<int>(kv.get_int("process.steps_per_day", cfg.process.steps_per_day));
    cfg.process.initial_price = kv.get_double("process.initial_price", cfg.process.initial_price);

    cfg.engine.margins.maintenance_margin =
        kv.get_double("engine.maintenance_margin", cfg.engine.margins.maintenance_margin);
    cfg.engine.margins.initial_margin =
        kv.get_double("engine.initial_margin", cfg.engine.margins.initial_margin);
    cfg.engine.margins.max_leverage =
        kv.get_double("engine.max_leverage", cfg.engine.margins.max_leverage);
    cfg.engine.fee_rate = kv.get_double("engine.fee_rate", cfg.engine.fee_rate);
    cfg.engine.pool_quote_reserve =
        kv.get_double("engine.pool_quote_reserve", cfg.engine.pool_quote_reserve);
    cfg.engine.tick_spacing =
        static_cast<int>(kv.get_int("engine.tick_spacing", cfg.engine.tick_spacing));
    cfg.engine.pool_collateral =
        kv.get_double("engine.pool_collateral", cfg.engine.pool_collateral);

    for (auto& spec : cfg.population) {
        const std::string prefix = std::string("agents.") + to_string(spec.cls) + ".";
        spec.count = static_cast<int>(kv.get_int(prefix + "count", spec.count));
        spec.wealth_median = kv.get_double(prefix + "wealth_median", spec.wealth_median);
        spec.participation = kv.get_double(prefix + "participation", spec.participation);
        spec.leverage_min = kv.get_double(prefix + "leverage_min", spec.leverage_min);
        spec.leverage_max = kv.get_double(prefix + "leverage_max", spec.leverage_max);
        spec.size_fraction = kv.get_double(prefix + "size_fraction", spec.size_fraction);
        spec.overreaction = kv.get_double(prefix + "overreaction", spec.overreaction);
        spec.close_prob = kv.get_double(prefix + "close_prob", spec.close_prob);
        spec.close_vol_sensitivity =
            kv.get_double(prefix + "close_vol_sensitivity", spec.close_vol_sensitivity);
        spec.rebalance_period =
            static_cast<int>(kv.get_int(prefix + "rebalance_period", spec.rebalance_period));
        spec.hedge_fraction = kv.get_double(prefix + "hedge_fraction", spec.hedge_fraction);
        spec.shock_intensity_per_day =
            kv.get_double(prefix + "shock_intensity", spec.shock_intensity_per_day);
        spec.shock_size = kv.get_double(prefix + "shock_size", spec.shock_size);
        spec.arb_threshold = kv.get_double(prefix + "arb_threshold", spec.arb_threshold);
        spec.quote_fraction = kv.get_double(prefix + "quote_fraction", spec.quote_fraction);
        spec.quote_half_spread =
            kv.get_double(prefix + "quote_half_spread", spec.quote_half_spread);
        spec.depth_oi_gain = kv.get_double(prefix + "depth_oi_gain", spec.depth_oi_gain);
        spec.signal_noise = kv.get_double(prefix + "signal_noise", spec.signal_noise);
        spec.momentum_tilt = kv.get_double(prefix + "momentum_tilt", spec.momentum_tilt);
    }
    cfg.validate();
    return cfg;
}

KeyValueConfig ExperimentConfig::to_key_values() const {
    KeyValueConfig kv;
    kv.set("version", kVersionStamp);
    kv.set("seed", std::to_string(seed));
    kv.set("days", std::to_string(days));
    kv.set("start_date", start_date.to_string());
    std::string engine_list;
    for (std::size_t i = 0; i < engines.size(); ++i)
        engine_list += (i ? "," : "") + to_string(engines[i]);
    kv.set("engines", engine_list);
    kv.set("trailing_vol_window", std::to_string(trailing_vol_window));
    kv.set("regime_vol_window", std::to_string(regime_vol_window));
    kv.set("reference_vol", format_double(reference_vol));
    kv.set("keep_fill_log", keep_fill_log ? "true" : "false");

    kv.set("process.kind",
           process.kind == PriceProcess::Kind::GeometricBrownian ? "gbm" : "jump-diffusion");
    kv.set("process.drift", format_double(process.drift_per_year));
    kv.set("process.vol", format_double(process.vol_per_sqrt_year));
    kv.set("process.jump_intensity", format_double(process.jump_intensity_per_year));
    kv.set("process.jump_log_sd", format_double(process.jump_log_sd));
    kv.set("process.vol_persistence", format_double(process.vol_persistence));
    kv.set("process.vol_of_vol", format_double(process.vol_of_vol));
    kv.set("process.steps_per_day", std::to_string(process.steps_per_day));
    kv.set("process.initial_price", format_double(process.initial_price));

    kv.set("engine.maintenance_margin", format_double(engine.margins.maintenance_margin));
    kv.set("engine.initial_margin", format_double(engine.margins.initial_margin));
    kv.set("engine.max_leverage", format_double(engine.margins.max_leverage));
    kv.set("engine.fee_rate", format_double(engine.fee_rate));
    kv.set("engine.pool_quote_reserve", format_double(engine.pool_quote_reserve));
    kv.set("engine.tick_spacing", std::to_string(engine.tick_spacing));
    kv.set("engine.pool_collateral", format_double(engine.pool_collateral));

    for (const auto& spec : population) {
        const std::string prefix = std::string("agents.") + to_string(spec.cls) + ".";
        kv.set(prefix + "count", std::to_string(spec.count));
        kv.set(prefix + "wealth_median", format_double(spec.wealth_median));
        kv.set(prefix + "participation", format_double(spec.participation));
        kv.set(prefix + "leverage_min", format_double(spec.leverage_min));
        kv.set(prefix + "leverage_max", format_double(spec.leverage_max));
        kv.set(prefix + "size_fraction", format_double(spec.size_fraction));
        kv.set(prefix + "overreaction", format_double(spec.overreaction));
        kv.set(prefix + "close_prob", format_double(spec.close_prob));
        kv.set(prefix + "close_vol_sensitivity", format_double(spec.close_vol_sensitivity));
        kv.set(prefix + "rebalance_period", std::to_string(spec.rebalance_period));
        kv.set(prefix + "hedge_fraction", format_double(spec.hedge_fraction));
        kv.set(prefix + "shock_intensity", format_double(spec.shock_intensity_per_day));
        kv.set(prefix + "shock_size", format_double(spec.shock_size));
        kv.set(prefix + "arb_threshold", format_double(spec.arb_threshold));
        kv.set(prefix + "quote_fraction", format_double(spec.quote_fraction));
        kv.set(prefix + "quote_half_spread", format_double(spec.quote_half_spread));
        kv.set(prefix + "depth_oi_gain", format_double(spec.depth_oi_gain));
        kv.set(prefix + "signal_noise", format_double(spec.signal_noise));
        kv.set(prefix + "momentum_tilt", format_double(spec.momentum_tilt));
    }
    return kv;
}

const EngineRunResult& ExperimentResult::engine(EngineKind kind) const {
    for (const auto& e : engines)
        if (e.kind == kind) return e;
    throw DataError("experiment result has no engine '" + to_string(kind) + "'");
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentResult result;

    PriceProcess process = config.process;
    process.seed = Rng(config.seed).fork("price").next_u64();
    const PricePath path = generate_price_path(process, config.start_date, config.days);
    result.spot_candles = path.daily_candles();

    for (const EngineKind kind : config.engines) {
        EngineRunResult run;
        run.kind = kind;
        run.activity.source = source_for(kind);

        std::unique_ptr<Exchange> engine;
        switch (kind) {
            case EngineKind::Lob:
                engine = std::make_unique<LobExchange>(path.initial_price, config.engine.margins);
                break;
            case EngineKind::Oracle: {
                auto oracle = std::make_unique<OracleExchange>(config.engine.pool_collateral,
                                                               config.engine.margins);
                oracle->set_oracle_price(path.initial_price);
                engine = std::move(oracle);
                break;
            }
            case EngineKind::Vamm: {
                const double quote = config.engine.pool_quote_reserve;
                VammPool pool = VammPool::uniform(quote, quote / path.initial_price,
                                                  config.engine.fee_rate);
                engine = std::make_unique<VammExchange>(std::move(pool), config.engine.margins);
                break;
            }
        }
        engine->set_keep_fill_log(config.keep_fill_log);

        Population population(config.population,
                              Rng(config.seed).fork("agents").fork(to_string(kind)));
        population.fund_all(*engine);

        std::deque<double> trailing;
        std::deque<double> trailing_long;
        std::deque<double> oi_trail; // end-of-day open interest, USD
        std::uint64_t global_step = 0;

        for (int d = 0; d < config.days; ++d) {
            const Date date = config.start_date + d;
            MarketView view;
            view.day = d;
            view.steps_per_day = path.steps_per_day;
            view.reference_vol = config.reference_vol;
            view.last_day_return = d > 0 ? log_return(result.spot_candles[d - 1]) : 0.0;
            double trail_sum = 0;
            for (double v : trailing) trail_sum += v;
            view.trailing_vol = trailing.empty()
                                    ? 0.0
                                    : trail_sum / static_cast<double>(trailing.size());
            if (static_cast<int>(trailing_long.size()) >= config.trailing_vol_window) {
                double long_sum = 0;
                for (double v : trailing_long) long_sum += v;
                view.trailing_vol_long = long_sum / static_cast<double>(trailing_long.size());
            } else {
                view.trailing_vol_long = 0.0;
            }

            double day_high = path.day_open(d);
            double day_low = day_high;

            engine->begin_day(date);
            for (int s = 0; s < path.steps_per_day; ++s, ++global_step) {
                const double fundamental = path.step(d, s);
                day_high = std::max(day_high, fundamental);
                day_low = std::min(day_low, fundamental);
                view.step = s;
                view.fundamental = fundamental;
                view.intraday_range_vol = std::log(day_high / day_low);
                if (!oi_trail.empty()) {
                    double oi_mean = 0;
                    for (double v : oi_trail) oi_mean += v;
                    oi_mean /= static_cast<double>(oi_trail.size());
                    view.oi_depth_ratio = oi_mean > 0 ? engine->oi_long() / oi_mean : 1.0;
                } else {
                    view.oi_depth_ratio = 1.0;
                }

                if (kind == EngineKind::Oracle)
                    static_cast<OracleExchange*>(engine.get())->set_oracle_price(fundamental);

                for (const AgentClass cls :
                     {AgentClass::Informed, AgentClass::Uninformed, AgentClass::Hedger,
                      AgentClass::Speculator}) {
                    view.mark = engine->mark_price();
                    population.step_class(cls, view, *engine);
                }
                run.liquidation_count += engine->risk_step(global_step).size();
                if (kind == EngineKind::Vamm) {
                    view.mark = engine->mark_price();
                    population.step_class(AgentClass::Arbitrageur, view, *engine);
                }
                engine->close_step(global_step);
            }
            run.activity.records.push_back(engine->end_day());
            run.candles.push_back(engine->day_candle());
            population.recapitalize(*engine, d);

            trailing.push_back(garman_klass(result.spot_candles[static_cast<std::size_t>(d)],
                                            RadicandPolicy::ClampToZero)
                                   .sigma);
            if (static_cast<int>(trailing.size()) > config.trailing_vol_window)
                trailing.pop_front();
            trailing_long.push_back(trailing.back());
            if (static_cast<int>(trailing_long.size()) > config.regime_vol_window)
                trailing_long.pop_front();
            oi_trail.push_back(engine->oi_long());
            if (static_cast<int>(oi_trail.size()) > config.trailing_vol_window)
                oi_trail.pop_front();
        }

        run.fills = engine->fill_log();
        run.rejected_orders = population.rejected_orders();
        if (kind == EngineKind::Vamm) {
            const auto& ch = static_cast<VammExchange*>(engine.get())->clearing_house();
            run.pool_positions = ch.pool().positions();
        }
        result.engines.push_back(std::move(run));
    }

    std::ostringstream manifest;
    const KeyValueConfig echo = config.to_key_values();
    for (const auto& key : echo.keys())
        manifest << key << " = " << echo.values().at(key) << '\n';
    result.manifest = manifest.str();
    return result;
}

void write_experiment_artifacts(const ExperimentResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto join = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

    write_text_file(join("manifest.txt"), result.manifest);
    write_text_file(join("candles_spot.csv"), serialize_candles(result.spot_candles));

    for (const auto& run : result.engines) {
        const std::string tag = to_string(run.kind);
        write_text_file(join("candles_" + tag + ".csv"), serialize_candles(run.candles));
        write_text_file(join("activity_" + tag + ".csv"), serialize_activity(run.activity));
        if (!run.fills.empty()) {
            write_text_file(join("fills_" + tag + ".csv"), serialize_fill_log(run.fills));
            write_text_file(join("orders_" + tag + ".csv"), serialize_order_log(run.fills));
        }
        if (run.kind == EngineKind::Vamm) {
            nlohmann::json positions = nlohmann::json::array();
            for (const auto& pos : run.pool_positions) {
                positions.push_back({{"owner", pos.owner},
                                     {"lower_price", pos.lower_price},
                                     {"upper_price", pos.upper_price},
                                     {"liquidity", pos.liquidity},
                                     {"leverage", pos.leverage},
                                     {"active", pos.active}});
            }
            write_text_file(join("pool_positions.json"), positions.dump(2) + "\n");
        }
    }
}

} // namespace perpsim
