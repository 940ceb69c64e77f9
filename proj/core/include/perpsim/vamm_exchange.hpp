#pragma once

#include "perpsim/exchange.hpp"
#include "perpsim/vamm.hpp"

namespace perpsim {

/// Exchange adapter over the virtual-AMM clearing house. Orders are sized by
/// USD notional; the pool is the execution venue and the counterparty.
/// Emits no leverage aggregates: positions are cross-margined against one
/// collateral pool, so per-position leverage is not a stored quantity.
class VammExchange : public Exchange {
public:
    VammExchange(VammPool pool, MarginParams margins);

    EngineKind kind() const override { return EngineKind::Vamm; }
    double mark_price() const override { return ch_.mark_price(); }

    void fund(const std::string& owner, double collateral) override;
    double equity(const std::string& owner) const override;
    double position(const std::string& owner) const override;

    SubmitResult submit(const AgentOrder& order) override;

    void begin_day(Date date) override;
    std::vector<LiquidationEvent> risk_step(std::uint64_t step) override;
    void close_step(std::uint64_t step) override;
    ActivityRecord end_day() override;
    Candle day_candle() const override { return candle_.finish(); }

    double oi_long() const override { return ch_.oi_long(); }
    double oi_short() const override { return ch_.oi_short(); }

    VammClearingHouse& clearing_house() { return ch_; }
    const VammClearingHouse& clearing_house() const { return ch_; }

    /// Signed quote notional that would move the pool to `target_price`
    /// (positive = buy/long pressure needed). Evaluated on a copy; the pool
    /// is untouched.
    double quote_needed_to_price(double target_price) const;

private:
    VammClearingHouse ch_;
    std::uint64_t next_order_id_ = 1;
    std::uint64_t current_step_ = 0;
    CandleBuilder candle_;
};

} // namespace perpsim
