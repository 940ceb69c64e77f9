#pragma once

#include "perpsim/agents.hpp"
#include "perpsim/config.hpp"
#include "perpsim/exchange.hpp"
#include "perpsim/marketdata.hpp"
#include "perpsim/vamm.hpp"

#include <string>
#include <vector>

namespace perpsim {

struct EngineSettings {
    MarginParams margins;
    double fee_rate = 0.0;           // VAMM pool fee
    double pool_quote_reserve = 3e8; // VAMM uniform-mode depth (quote side)
    int tick_spacing = 60;
    double pool_collateral = 1e9;    // oracle engine counterparty capacity
};

/// Everything a run needs; echoed verbatim into the manifest so a run is
/// reproducible from its artifacts alone.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    int days = 250;
    Date start_date = Date(2023, 1, 1);
    std::vector<EngineKind> engines = {EngineKind::Lob, EngineKind::Oracle, EngineKind::Vamm};
    PriceProcess process;
    std::vector<TraderSpec> population = default_population();
    EngineSettings engine;
    int trailing_vol_window = 5;
    int regime_vol_window = 20;
    double reference_vol = 0.022;
    bool keep_fill_log = true;

    void validate() const;
    static ExperimentConfig from_key_values(const KeyValueConfig& kv);
    KeyValueConfig to_key_values() const;
};

struct EngineRunResult {
    EngineKind kind = EngineKind::Lob;
    std::vector<Candle> candles;
    ActivitySeries activity;
    std::vector<FillRecord> fills;
    std::size_t liquidation_count = 0;
    std::size_t rejected_orders = 0;
    std::vector<LiquidityPosition> pool_positions; // VAMM only
};

struct ExperimentResult {
    std::vector<Candle> spot_candles;
    std::vector<EngineRunResult> engines;
    std::string manifest; // key=value echo of the effective config

    const EngineRunResult& engine(EngineKind kind) const;
};

/// Runs every configured engine against one shared exogenous price path.
/// Deterministic: (config, seed) -> bitwise-identical outputs.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes candles_spot.csv, per-engine candles/activity/fill/order CSVs,
/// pool_positions.json and manifest.txt under out_dir.
void write_experiment_artifacts(const ExperimentResult& result, const std::string& out_dir);

} // namespace perpsim
