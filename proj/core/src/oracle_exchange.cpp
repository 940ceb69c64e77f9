#include "perpsim/oracle_exchange.hpp"

#include "perpsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace perpsim {

double aggregate_oracle_price(std::span<const double> sources, bool use_mean) {
    std::vector<double> live;
    live.reserve(sources.size());
    for (double v : sources)
        if (std::isfinite(v) && v > 0) live.push_back(v);
    if (live.empty()) throw DataError("oracle feed: every source is missing at this step");
    if (use_mean) {
        double s = 0;
        for (double v : live) s += v;
        return s / static_cast<double>(live.size());
    }
    std::sort(live.begin(), live.end());
    const std::size_t n = live.size();
    return n % 2 == 1 ? live[n / 2] : 0.5 * (live[n / 2 - 1] + live[n / 2]);
}

OracleExchange::OracleExchange(double pool_collateral, MarginParams margins)
    : margins_(margins), pool_collateral_(pool_collateral) {
    if (!(pool_collateral > 0)) throw DataError("oracle engine needs positive pool collateral");
}

void OracleExchange::set_oracle_price(double price) {
    if (!(price > 0)) throw DataError("oracle price must be > 0");
    oracle_price_ = price;
    candle_.push(price);
}

void OracleExchange::fund(const std::string& owner, double collateral) {
    ensure_account(owner).collateral += collateral;
}

double OracleExchange::equity(const std::string& owner) const {
    const auto it = accounts_.find(owner);
    return it == accounts_.end() ? 0.0 : it->second.equity(oracle_price_);
}

double OracleExchange::position(const std::string& owner) const {
    const auto it = accounts_.find(owner);
    return it == accounts_.end() ? 0.0 : it->second.position;
}

MarginAccount& OracleExchange::ensure_account(const std::string& owner) {
    auto& acc = accounts_[owner];
    if (acc.owner.empty()) acc.owner = owner;
    return acc;
}

double OracleExchange::net_exposure_base() const {
    double net = 0;
    for (const auto& [owner, acc] : accounts_) net += acc.position;
    return net;
}

SubmitResult OracleExchange::submit(const AgentOrder& order) {
    SubmitResult result;
    if (!(oracle_price_ > 0)) {
        result.reason = "no oracle price yet";
        return result;
    }
    const double price = oracle_price_;
    double qty = order.quantity > 0 ? order.quantity : order.notional / price;
    MarginAccount& acc = ensure_account(order.owner);
    Side side = order.side;
    if (order.reduce_only) {
        if (acc.position == 0) {
            result.reason = "no open position";
            return result;
        }
        side = acc.position > 0 ? Side::Sell : Side::Buy;
        qty = std::min(qty > 0 ? qty : std::fabs(acc.position), std::fabs(acc.position));
    }
    if (!(qty > 0)) {
        result.reason = "empty order";
        return result;
    }

    if (!order.reduce_only) {
        if (!(order.leverage >= 1) || order.leverage > margins_.max_leverage) {
            result.reason = "leverage outside [1, max]";
            return result;
        }
        const double post_position = acc.position + (side == Side::Buy ? qty : -qty);
        const double post_notional = std::fabs(post_position) * price;
        const double required =
            std::max(margins_.initial_margin, 1.0 / order.leverage) * post_notional;
        if (acc.equity(price) < required) {
            result.reason = "initial margin check failed";
            return result;
        }
        // the pool is the counterparty; cap its net exposure by its collateral
        const double post_net =
            net_exposure_base() + (side == Side::Buy ? qty : -qty);
        if (std::fabs(post_net) * price > pool_collateral_) {
            result.reason = "pool capacity exceeded";
            return result;
        }
    }

    // fill exactly at the oracle price, full quantity
    const double signed_qty = side == Side::Buy ? qty : -qty;
    double remaining = qty;
    if (acc.position != 0 && (acc.position > 0) != (signed_qty > 0)) {
        const double closing = std::min(std::fabs(acc.position), remaining);
        const double entry_share = acc.entry_notional * closing / std::fabs(acc.position);
        const double pnl =
            acc.position > 0 ? closing * price - entry_share : entry_share - closing * price;
        acc.realized_pnl += pnl;
        acc.collateral += pnl;
        acc.entry_notional -= entry_share;
        if (acc.position > 0) oi_long_ = std::max(0.0, oi_long_ - entry_share);
        else oi_short_ = std::max(0.0, oi_short_ - entry_share);
        acc.position += acc.position > 0 ? -closing : closing;
        if (std::fabs(acc.position) < 1e-12) {
            acc.position = 0;
            acc.entry_notional = 0;
        }
        remaining -= closing;
    }
    if (remaining > 0) {
        acc.position += side == Side::Buy ? remaining : -remaining;
        acc.entry_notional += remaining * price;
        acc.entry_leverage = order.leverage;
        if (side == Side::Buy) oi_long_ += remaining * price;
        else oi_short_ += remaining * price;
        day_.record_open(side == Side::Buy ? PositionSide::Long : PositionSide::Short,
                         remaining * price, order.leverage);
    }
    day_.volume += qty * price;

    FillRecord rec;
    rec.step = current_step_;
    rec.order_id = next_order_id_++;
    rec.side = side;
    rec.price = price;
    rec.qty = qty;
    rec.liquidation = false;
    rec.cls = order.cls;
    rec.owner = order.owner;
    record_fill(rec);

    result.accepted = true;
    result.order_id = rec.order_id;
    result.filled_qty = qty;
    result.filled_notional = qty * price;
    return result;
}

void OracleExchange::begin_day(Date date) {
    day_.reset();
    candle_.start(date, oracle_price_);
}

std::vector<LiquidationEvent> OracleExchange::risk_step(std::uint64_t step) {
    current_step_ = step;
    std::vector<LiquidationEvent> events;
    const double price = oracle_price_;
    if (!(price > 0)) return events;

    for (auto& [owner, acc] : accounts_) {
        if (acc.position == 0) continue;
        if (acc.margin_ratio(price) >= margins_.maintenance_margin) continue;
        const bool was_long = acc.position > 0;
        const double qty = std::fabs(acc.position);
        const double entry_share = acc.entry_notional;
        const double pnl = was_long ? qty * price - entry_share : entry_share - qty * price;
        acc.realized_pnl += pnl;
        acc.collateral += pnl;
        acc.position = 0;
        acc.entry_notional = 0;
        if (was_long) oi_long_ = std::max(0.0, oi_long_ - entry_share);
        else oi_short_ = std::max(0.0, oi_short_ - entry_share);

        const double notional = qty * price;
        day_.volume += notional;
        const PositionSide side = was_long ? PositionSide::Long : PositionSide::Short;
        day_.record_liquidation(side, notional);

        FillRecord rec;
        rec.step = step;
        rec.order_id = next_order_id_++;
        rec.side = was_long ? Side::Sell : Side::Buy;
        rec.price = price;
        rec.qty = qty;
        rec.liquidation = true;
        rec.cls = AgentClass::External;
        rec.owner = owner;
        record_fill(rec);

        LiquidationEvent ev;
        ev.owner = owner;
        ev.side = side;
        ev.notional = notional;
        ev.price = price;
        events.push_back(ev);
    }
    return events;
}

void OracleExchange::close_step(std::uint64_t step) { current_step_ = step; }

ActivityRecord OracleExchange::end_day() {
    ActivityRecord rec;
    rec.date = candle_.candle.date;
    rec.volume = day_.volume;
    rec.oi_long = oi_long_;
    rec.oi_short = oi_short_;
    rec.liq_long = day_.liq_long;
    rec.liq_short = day_.liq_short;
    rec.lev_long = day_.avg_leverage(PositionSide::Long);
    rec.lev_short = day_.avg_leverage(PositionSide::Short);
    return rec;
}

} // namespace perpsim
