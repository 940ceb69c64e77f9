#include "perpsim/vamm_exchange.hpp"

#include <algorithm>
#include <cmath>

namespace perpsim {

VammExchange::VammExchange(VammPool pool, MarginParams margins)
    : ch_(std::move(pool), margins) {}

void VammExchange::fund(const std::string& owner, double collateral) {
    ch_.account(owner).collateral += collateral;
}

double VammExchange::equity(const std::string& owner) const {
    const auto it = ch_.accounts().find(owner);
    return it == ch_.accounts().end() ? 0.0 : it->second.equity(ch_.mark_price());
}

double VammExchange::position(const std::string& owner) const {
    const auto it = ch_.accounts().find(owner);
    return it == ch_.accounts().end() ? 0.0 : it->second.position;
}

SubmitResult VammExchange::submit(const AgentOrder& order) {
    SubmitResult result;
    const double mark = ch_.mark_price();

    if (order.reduce_only) {
        const auto it = ch_.accounts().find(order.owner);
        if (it == ch_.accounts().end() || it->second.position == 0) {
            result.reason = "no open position";
            return result;
        }
        const double pos_notional = it->second.notional(mark);
        const double fraction = std::min(1.0, order.notional > 0 ? order.notional / pos_notional : 1.0);
        const TradeResult closed = ch_.close_position(order.owner, fraction);
        if (!closed.ok) {
            result.reason = closed.reason;
            return result;
        }
        result.accepted = true;
        result.order_id = next_order_id_++;
        result.filled_qty = closed.base;
        result.filled_notional = closed.notional;

        FillRecord rec;
        rec.step = current_step_;
        rec.order_id = result.order_id;
        rec.side = order.side;
        rec.price = closed.fill_price;
        rec.qty = closed.base;
        rec.cls = order.cls;
        rec.owner = order.owner;
        record_fill(rec);
        candle_.push(ch_.mark_price());
        return result;
    }

    if (!(order.notional > 0)) {
        result.reason = "notional must be > 0";
        return result;
    }
    const PositionSide side = order.side == Side::Buy ? PositionSide::Long : PositionSide::Short;
    const double margin = order.notional / std::max(1.0, order.leverage);
    const TradeResult opened = ch_.open_position(order.owner, side, margin, order.leverage);
    if (!opened.ok) {
        result.reason = opened.reason;
        return result;
    }
    result.accepted = true;
    result.order_id = next_order_id_++;
    result.filled_qty = opened.base;
    result.filled_notional = opened.notional;

    FillRecord rec;
    rec.step = current_step_;
    rec.order_id = result.order_id;
    rec.side = order.side;
    rec.price = opened.fill_price;
    rec.qty = opened.base;
    rec.cls = order.cls;
    rec.owner = order.owner;
    record_fill(rec);
    candle_.push(ch_.mark_price());
    return result;
}

void VammExchange::begin_day(Date date) {
    ch_.day_volume = 0;
    ch_.day_liq_long = 0;
    ch_.day_liq_short = 0;
    candle_.start(date, ch_.mark_price());
}

std::vector<LiquidationEvent> VammExchange::risk_step(std::uint64_t step) {
    current_step_ = step;
    const auto events = ch_.liquidate_sweep();
    for (const auto& ev : events) {
        FillRecord rec;
        rec.step = step;
        rec.order_id = next_order_id_++;
        rec.side = ev.side == PositionSide::Long ? Side::Sell : Side::Buy;
        rec.price = ev.price;
        rec.qty = ev.price > 0 ? ev.notional / ev.price : 0;
        rec.liquidation = true;
        rec.cls = AgentClass::External;
        rec.owner = ev.owner;
        record_fill(rec);
    }
    if (!events.empty()) candle_.push(ch_.mark_price());
    return events;
}

void VammExchange::close_step(std::uint64_t step) {
    current_step_ = step;
    candle_.push(ch_.mark_price());
}

ActivityRecord VammExchange::end_day() {
    ch_.apply_funding();
    ActivityRecord rec;
    rec.date = candle_.candle.date;
    rec.volume = ch_.day_volume;
    rec.oi_long = ch_.oi_long();
    rec.oi_short = ch_.oi_short();
    rec.liq_long = ch_.day_liq_long;
    rec.liq_short = ch_.day_liq_short;
    // no leverage aggregates: cross-margin makes per-position leverage derived
    return rec;
}

double VammExchange::quote_needed_to_price(double target_price) const {
    VammPool copy = ch_.pool();
    const double current = copy.price();
    if (target_price == current) return 0.0;
    const SwapResult swap = copy.swap_to_price(target_price);
    return target_price > current ? swap.amount_in : -swap.amount_out;
}

} // namespace perpsim
