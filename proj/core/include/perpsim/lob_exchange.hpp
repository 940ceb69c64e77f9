#pragma once

#include "perpsim/exchange.hpp"
#include "perpsim/orderbook.hpp"

#include <map>

namespace perpsim {

/// Limit-order-book engine (the centralized / hybrid "LOB" design): price-time
/// priority matching, per-account cross margin, keeper sweeps that liquidate
/// through the book. Every contract pairs a long with a short, so open
/// interest is a single ledger valued identically for both sides.
class LobExchange : public Exchange {
public:
    LobExchange(double initial_mark, MarginParams margins);

    EngineKind kind() const override { return EngineKind::Lob; }
    double mark_price() const override { return mark_; }

    void fund(const std::string& owner, double collateral) override;
    double equity(const std::string& owner) const override;
    double position(const std::string& owner) const override;

    SubmitResult submit(const AgentOrder& order) override;
    bool cancel_order(std::uint64_t order_id);
    std::size_t cancel_owner_orders(const std::string& owner);

    void begin_day(Date date) override;
    std::vector<LiquidationEvent> risk_step(std::uint64_t step) override;
    void close_step(std::uint64_t step) override;
    ActivityRecord end_day() override;
    Candle day_candle() const override { return candle_.finish(); }

    /// Open interest in USD at the current mark. The two sides are the same
    /// contracts, so both report the same ledger valued at the same mark.
    double oi_long() const override { return oi_base_ * mark_; }
    double oi_short() const override { return oi_base_ * mark_; }
    double oi_base() const { return oi_base_; }

    const OrderBook& book() const { return book_; }
    const std::map<std::string, MarginAccount>& accounts() const { return accounts_; }
    const MarginAccount& account(const std::string& owner) const;

private:
    MarginAccount& ensure_account(const std::string& owner);
    bool margin_precheck(const MarginAccount& acc, Side side, double qty, double ref_price,
                         double leverage, std::string* reason) const;
    void apply_party_fill(MarginAccount& acc, Side side, double qty, double price,
                          double leverage, bool opened_today_counts);
    void recompute_open_interest();

    OrderBook book_;
    std::map<std::string, MarginAccount> accounts_;
    MarginParams margins_;
    double mark_ = 0;
    double oi_base_ = 0; // open contracts in base units

    std::uint64_t next_order_id_ = 1;
    std::uint64_t next_timestamp_ = 1;
    std::uint64_t current_step_ = 0;

    DayAccumulator day_;
    CandleBuilder candle_;
};

} // namespace perpsim
