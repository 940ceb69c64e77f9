#pragma once

#include "perpsim/exchange.hpp"

#include <map>
#include <span>

namespace perpsim {

/// Median (default) aggregation of spot sources into one oracle price.
/// Missing sources are NaN; a step where every source is missing is an error.
double aggregate_oracle_price(std::span<const double> sources, bool use_mean = false);

/// Oracle-priced engine: every order fills exactly at the external oracle
/// price, the liquidity pool is the counterparty, and trades never move the
/// price. Long and short open interest evolve independently.
class OracleExchange : public Exchange {
public:
    OracleExchange(double pool_collateral, MarginParams margins);

    EngineKind kind() const override { return EngineKind::Oracle; }
    double mark_price() const override { return oracle_price_; }

    /// Pushes this step's oracle price. Trades never modify it.
    void set_oracle_price(double price);

    void fund(const std::string& owner, double collateral) override;
    double equity(const std::string& owner) const override;
    double position(const std::string& owner) const override;

    SubmitResult submit(const AgentOrder& order) override;

    void begin_day(Date date) override;
    std::vector<LiquidationEvent> risk_step(std::uint64_t step) override;
    void close_step(std::uint64_t step) override;
    ActivityRecord end_day() override;
    Candle day_candle() const override { return candle_.finish(); }

    double oi_long() const override { return oi_long_; }
    double oi_short() const override { return oi_short_; }

    const std::map<std::string, MarginAccount>& accounts() const { return accounts_; }
    double pool_collateral() const { return pool_collateral_; }

private:
    MarginAccount& ensure_account(const std::string& owner);
    /// Net trader base exposure the pool is counterparty to.
    double net_exposure_base() const;

    std::map<std::string, MarginAccount> accounts_;
    MarginParams margins_;
    double oracle_price_ = 0;
    double pool_collateral_ = 0;
    double oi_long_ = 0;  // USD entry notional, long side
    double oi_short_ = 0; // USD entry notional, short side

    std::uint64_t next_order_id_ = 1;
    std::uint64_t current_step_ = 0;

    DayAccumulator day_;
    CandleBuilder candle_;
};

} // namespace perpsim
