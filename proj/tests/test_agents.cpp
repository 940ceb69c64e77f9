#include "perpsim/agents.hpp"
#include "perpsim/experiment.hpp"
#include "perpsim/lob_exchange.hpp"
#include "perpsim/marketdata.hpp"
#include "perpsim/oracle_exchange.hpp"
#include "perpsim/vamm_exchange.hpp"
#include "perpsim/volatility.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace perpsim;

namespace {

PriceProcess flat_process() {
    PriceProcess p;
    p.vol_per_sqrt_year = 0.0;
    p.drift_per_year = 0.0;
    p.steps_per_day = 8;
    p.seed = 3;
    return p;
}

TraderSpec only_uninformed(int count) {
    TraderSpec spec;
    spec.cls = AgentClass::Uninformed;
    spec.count = count;
    spec.wealth_median = 1e5;
    spec.wealth_log_sd = 0.0; // deterministic wealth for expectation checks
    spec.participation = 1.0;
    spec.size_fraction = 0.1;
    spec.overreaction = 1.5;
    spec.momentum_tilt = 5.0;
    spec.close_prob = 0.1;
    spec.close_vol_sensitivity = 0.0;
    spec.leverage_min = 2;
    spec.leverage_max = 2;
    return spec;
}

double gross_notional(const std::vector<AgentOrder>& orders) {
    double total = 0;
    for (const auto& o : orders) total += o.notional;
    return total;
}

} // namespace

TEST_CASE("flat process produces degenerate candles with zero volatility") {
    const auto candles = generate_path(flat_process(), Date(2023, 1, 1), 10);
    REQUIRE(candles.size() == 10);
    for (const auto& c : candles) {
        CHECK(c.open == c.close);
        CHECK(c.high == c.low);
        CHECK(garman_klass(c).sigma == 0.0);
    }
}

TEST_CASE("same seed gives bitwise-identical candles") {
    PriceProcess p;
    p.vol_per_sqrt_year = 0.6;
    p.seed = 99;
    const auto a = generate_path(p, Date(2023, 1, 1), 50);
    const auto b = generate_path(p, Date(2023, 1, 1), 50);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].open == b[i].open);
        CHECK(a[i].high == b[i].high);
        CHECK(a[i].low == b[i].low);
        CHECK(a[i].close == b[i].close);
    }
    PriceProcess q = p;
    q.seed = 100;
    const auto c = generate_path(q, Date(2023, 1, 1), 50);
    CHECK(c[10].close != a[10].close);
}

TEST_CASE("GBM mean Garman-Klass sigma tracks sigma/sqrt(365) within 15%") {
    // Monte-Carlo oracle over 20 seeds; 192 intraday steps keep the
    // discrete-monitoring bias of the high/low range inside the tolerance.
    const double target = 0.6 / std::sqrt(365.0);
    double total = 0;
    std::size_t count = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        PriceProcess p;
        p.vol_per_sqrt_year = 0.6;
        p.steps_per_day = 192;
        p.seed = seed;
        const auto candles = generate_path(p, Date(2018, 1, 1), 2000);
        for (const auto& c : candles) total += garman_klass(c).sigma;
        count += candles.size();
    }
    const double mean_gk = total / static_cast<double>(count);
    CHECK(std::fabs(mean_gk - target) / target < 0.15);
}

TEST_CASE("jump diffusion adds jump variance") {
    PriceProcess p;
    p.kind = PriceProcess::Kind::JumpDiffusion;
    p.vol_per_sqrt_year = 0.3;
    p.jump_intensity_per_year = 50.0;
    p.jump_log_sd = 0.05;
    p.seed = 4;
    const auto jd = generate_path(p, Date(2023, 1, 1), 600);
    PriceProcess q = p;
    q.kind = PriceProcess::Kind::GeometricBrownian;
    const auto plain = generate_path(q, Date(2023, 1, 1), 600);
    double var_jd = 0, var_plain = 0;
    for (const auto& c : jd) var_jd += log_return(c) * log_return(c);
    for (const auto& c : plain) var_plain += log_return(c) * log_return(c);
    CHECK(var_jd > var_plain);
}

TEST_CASE("zero agents produce zero orders") {
    Population pop({only_uninformed(0)}, Rng(1));
    OracleExchange ex(1e9, MarginParams{});
    ex.set_oracle_price(10'000.0);
    ex.begin_day(Date(2023, 1, 1));
    MarketView view;
    view.mark = 10'000.0;
    view.fundamental = 10'000.0;
    view.trailing_vol = 0.02;
    for (const AgentClass cls : {AgentClass::Informed, AgentClass::Uninformed, AgentClass::Hedger,
                                 AgentClass::Speculator, AgentClass::Arbitrageur})
        CHECK(pop.step_class(cls, view, ex).empty());
}

TEST_CASE("doubling trailing volatility strictly increases uninformed gross notional") {
    OracleExchange ex(1e12, MarginParams{});
    ex.set_oracle_price(10'000.0);
    ex.begin_day(Date(2023, 1, 1));
    MarketView view;
    view.mark = 10'000.0;
    view.fundamental = 10'000.0;
    view.reference_vol = 0.03;
    view.trailing_vol = 0.02; // vol ratio 0.667, clamp-free both before and after
    view.intraday_range_vol = 0.0;

    Population pop_low({only_uninformed(50)}, Rng(7));
    const double low = gross_notional(pop_low.step_class(AgentClass::Uninformed, view, ex));

    view.trailing_vol = 0.04;
    Population pop_high({only_uninformed(50)}, Rng(7)); // same seed, fresh streams
    const double high = gross_notional(pop_high.step_class(AgentClass::Uninformed, view, ex));
    CHECK(high > low);
    CHECK(high == doctest::Approx(2.0 * low).epsilon(1e-9));
}

TEST_CASE("overreaction: long notional after +r is ~1.5x short notional after -r") {
    OracleExchange ex(1e12, MarginParams{});
    ex.set_oracle_price(10'000.0);
    ex.begin_day(Date(2023, 1, 1));
    const double r = 0.02;
    double long_after_up = 0, short_after_down = 0;
    for (int rep = 0; rep < 500; ++rep) {
        MarketView view;
        view.mark = 10'000.0;
        view.fundamental = 10'000.0;
        view.reference_vol = 0.03;
        view.trailing_vol = 0.03;

        Population up({only_uninformed(20)}, Rng(1000 + rep));
        view.last_day_return = r;
        for (const auto& o : up.step_class(AgentClass::Uninformed, view, ex))
            if (o.side == Side::Buy && !o.reduce_only) long_after_up += o.notional;

        Population down({only_uninformed(20)}, Rng(1000 + rep));
        view.last_day_return = -r;
        for (const auto& o : down.step_class(AgentClass::Uninformed, view, ex))
            if (o.side == Side::Sell && !o.reduce_only) short_after_down += o.notional;
    }
    const double ratio = long_after_up / short_after_down;
    CHECK(ratio == doctest::Approx(1.5).epsilon(0.10));
}

TEST_CASE("informed agents quote both sides of the book around the fundamental") {
    TraderSpec informed;
    informed.cls = AgentClass::Informed;
    informed.count = 10;
    informed.wealth_median = 1e6;
    informed.wealth_log_sd = 0;
    informed.participation = 1.0;
    informed.signal_noise = 0.0;
    informed.quote_half_spread = 0.002;
    informed.quote_fraction = 0.05;
    informed.leverage_min = informed.leverage_max = 2;

    LobExchange lob(10'000.0, MarginParams{});
    Population pop({informed}, Rng(3));
    pop.fund_all(lob);
    lob.begin_day(Date(2023, 1, 1));
    MarketView view;
    view.mark = 10'000.0;
    view.fundamental = 10'000.0;
    const auto orders = pop.step_class(AgentClass::Informed, view, lob);
    CHECK(orders.size() == 20); // bid + ask per agent
    CHECK(lob.book().best_bid().value() == doctest::Approx(10'000.0 * 0.998));
    CHECK(lob.book().best_ask().value() == doctest::Approx(10'000.0 * 1.002));
    CHECK(!lob.book().crossed());
}

TEST_CASE("arbitrageurs pull the pool back inside the no-arbitrage band") {
    TraderSpec arb;
    arb.cls = AgentClass::Arbitrageur;
    arb.count = 1;
    arb.wealth_median = 1e9;
    arb.wealth_log_sd = 0;
    arb.leverage_min = arb.leverage_max = 10;
    arb.arb_threshold = 0.005;

    VammExchange ex(VammPool::uniform(1e8, 10'000.0), MarginParams{});
    Population pop({arb}, Rng(4));
    pop.fund_all(ex);
    ex.begin_day(Date(2023, 1, 1));

    ex.clearing_house().pool().swap_to_price(10'400.0); // 4% above spot
    MarketView view;
    view.fundamental = 10'000.0;
    view.mark = ex.mark_price();
    const auto orders = pop.step_class(AgentClass::Arbitrageur, view, ex);
    CHECK(!orders.empty());
    CHECK(ex.mark_price() <= 10'000.0 * 1.005 * (1 + 1e-9));
    CHECK(ex.mark_price() >= 10'000.0 * 0.995 * (1 - 1e-9));
}

TEST_CASE("smoke experiment: artifacts exist, schemas validate, determinism holds") {
    ExperimentConfig config;
    config.days = 3;
    config.seed = 11;
    config.process.steps_per_day = 6;
    // one-trader smoke population
    for (auto& spec : config.population) spec.count = spec.cls == AgentClass::Uninformed ? 1 : 0;

    const ExperimentResult a = run_experiment(config);
    const ExperimentResult b = run_experiment(config);
    REQUIRE(a.engines.size() == 3);
    CHECK(a.spot_candles.size() == 3);

    for (std::size_t e = 0; e < a.engines.size(); ++e) {
        CHECK(serialize_activity(a.engines[e].activity) ==
              serialize_activity(b.engines[e].activity));
        CHECK(serialize_candles(a.engines[e].candles) == serialize_candles(b.engines[e].candles));
        // schema round trip
        const auto parsed = parse_activity(serialize_activity(a.engines[e].activity),
                                           a.engines[e].activity.source);
        CHECK(parsed.records.size() == 3);
    }

    namespace fs = std::filesystem;
    const std::string dir = (fs::temp_directory_path() / "perpsim-smoke-test").string();
    fs::remove_all(dir);
    write_experiment_artifacts(a, dir);
    CHECK(fs::exists(fs::path(dir) / "manifest.txt"));
    CHECK(fs::exists(fs::path(dir) / "candles_spot.csv"));
    CHECK(fs::exists(fs::path(dir) / "activity_lob.csv"));
    CHECK(fs::exists(fs::path(dir) / "activity_oracle.csv"));
    CHECK(fs::exists(fs::path(dir) / "activity_vamm.csv"));
    CHECK(fs::exists(fs::path(dir) / "pool_positions.json"));
    CHECK(a.manifest.find("seed = 11") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("oracle-engine candles equal the exogenous path bitwise") {
    ExperimentConfig config;
    config.days = 5;
    config.seed = 21;
    config.engines = {EngineKind::Oracle};
    config.process.steps_per_day = 12;
    const ExperimentResult result = run_experiment(config);
    const auto& oracle = result.engine(EngineKind::Oracle);
    REQUIRE(oracle.candles.size() == result.spot_candles.size());
    for (std::size_t i = 0; i < oracle.candles.size(); ++i) {
        CHECK(oracle.candles[i].open == result.spot_candles[i].open);
        CHECK(oracle.candles[i].high == result.spot_candles[i].high);
        CHECK(oracle.candles[i].low == result.spot_candles[i].low);
        CHECK(oracle.candles[i].close == result.spot_candles[i].close);
    }
}

TEST_CASE("oracle price series is independent of the trader seed") {
    // same price path, different agent behavior: the no-impact invariant
    ExperimentConfig config;
    config.days = 4;
    config.engines = {EngineKind::Oracle};
    config.process.steps_per_day = 12;
    config.seed = 5;
    const auto base = run_experiment(config);

    ExperimentConfig other = config;
    for (auto& spec : other.population) spec.participation = std::min(1.0, spec.participation * 3);
    const auto changed = run_experiment(other);
    CHECK(serialize_candles(base.engine(EngineKind::Oracle).candles) ==
          serialize_candles(changed.engine(EngineKind::Oracle).candles));
}

TEST_CASE("with arbitrageurs enabled, the pool close stays inside the premium band") {
    ExperimentConfig config;
    config.days = 50;
    config.seed = 77;
    config.engines = {EngineKind::Vamm};
    config.process.steps_per_day = 12;
    config.process.vol_persistence = 0.9;
    config.process.vol_of_vol = 0.3;
    double threshold = 0;
    for (const auto& spec : config.population)
        if (spec.cls == AgentClass::Arbitrageur) threshold = spec.arb_threshold;
    REQUIRE(threshold > 0);

    const auto result = run_experiment(config);
    const auto& vamm = result.engine(EngineKind::Vamm);
    REQUIRE(vamm.candles.size() == result.spot_candles.size());
    for (std::size_t d = 0; d < vamm.candles.size(); ++d) {
        const double spot = result.spot_candles[d].close;
        const double premium = std::fabs(vamm.candles[d].close - spot) / spot;
        CHECK(premium <= threshold * (1 + 1e-6));
    }
}

TEST_CASE("experiment config key-value round trip") {
    ExperimentConfig config;
    config.days = 42;
    config.seed = 1234;
    config.process.vol_persistence = 0.9;
    config.process.vol_of_vol = 0.2;
    const KeyValueConfig kv = config.to_key_values();
    const ExperimentConfig back = ExperimentConfig::from_key_values(kv);
    CHECK(back.days == 42);
    CHECK(back.seed == 1234);
    CHECK(back.process.vol_persistence == doctest::Approx(0.9));
    CHECK(back.engines.size() == 3);

    KeyValueConfig invalid = kv;
    invalid.set("agents.uninformed.overreaction", "0.5");
    CHECK_THROWS_AS(ExperimentConfig::from_key_values(invalid), DataError);
}

TEST_CASE("class attribution covers every fill and sums to total volume") {
    ExperimentConfig config;
    config.days = 6;
    config.seed = 31;
    config.engines = {EngineKind::Oracle};
    config.process.steps_per_day = 12;
    const auto result = run_experiment(config);
    const auto& run = result.engine(EngineKind::Oracle);

    double volume_from_fills = 0;
    for (const auto& f : run.fills) {
        const bool classed = f.cls == AgentClass::Informed || f.cls == AgentClass::Uninformed ||
                             f.cls == AgentClass::Hedger || f.cls == AgentClass::Speculator ||
                             f.cls == AgentClass::Arbitrageur || f.cls == AgentClass::External;
        CHECK(classed);
        volume_from_fills += f.price * f.qty;
    }
    double volume_from_days = 0;
    for (const auto& rec : run.activity.records) volume_from_days += rec.volume;
    CHECK(volume_from_fills == doctest::Approx(volume_from_days).epsilon(1e-9));
}
