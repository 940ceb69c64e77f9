#include "perpsim/lob_exchange.hpp"

#include "perpsim/errors.hpp"

#include <algorithm>
#include <cmath>

namespace perpsim {

LobExchange::LobExchange(double initial_mark, MarginParams margins)
    : margins_(margins), mark_(initial_mark) {
    if (!(initial_mark > 0)) throw DataError("LOB engine needs a positive initial mark");
}

void LobExchange::fund(const std::string& owner, double collateral) {
    ensure_account(owner).collateral += collateral;
}

double LobExchange::equity(const std::string& owner) const {
    const auto it = accounts_.find(owner);
    return it == accounts_.end() ? 0.0 : it->second.equity(mark_);
}

double LobExchange::position(const std::string& owner) const {
    const auto it = accounts_.find(owner);
    return it == accounts_.end() ? 0.0 : it->second.position;
}

MarginAccount& LobExchange::ensure_account(const std::string& owner) {
    auto& acc = accounts_[owner];
    if (acc.owner.empty()) acc.owner = owner;
    return acc;
}

const MarginAccount& LobExchange::account(const std::string& owner) const {
    const auto it = accounts_.find(owner);
    if (it == accounts_.end()) throw DataError("unknown account '" + owner + "'");
    return it->second;
}

bool LobExchange::margin_precheck(const MarginAccount& acc, Side side, double qty,
                                  double ref_price, double leverage, std::string* reason) const {
    if (!(leverage >= 1) || leverage > margins_.max_leverage) {
        if (reason) *reason = "leverage outside [1, max]";
        return false;
    }
    const double post_position = acc.position + (side == Side::Buy ? qty : -qty);
    const double post_notional = std::fabs(post_position) * ref_price;
    const double required = std::max(margins_.initial_margin, 1.0 / leverage) * post_notional;
    if (acc.equity(mark_) < required) {
        if (reason) *reason = "initial margin check failed";
        return false;
    }
    return true;
}

void LobExchange::apply_party_fill(MarginAccount& acc, Side side, double qty, double price,
                                   double leverage, bool opened_today_counts) {
    double remaining = qty;
    const double signed_qty = side == Side::Buy ? qty : -qty;

    // reduce an opposite position first, realizing PnL pro rata
    if (acc.position != 0 && (acc.position > 0) != (signed_qty > 0)) {
        const double closing = std::min(std::fabs(acc.position), remaining);
        const double entry_share = acc.entry_notional * closing / std::fabs(acc.position);
        const double pnl = acc.position > 0 ? closing * price - entry_share
                                            : entry_share - closing * price;
        acc.realized_pnl += pnl;
        acc.collateral += pnl;
        acc.entry_notional -= entry_share;
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
        acc.entry_leverage = leverage;
        if (opened_today_counts)
            day_.record_open(side == Side::Buy ? PositionSide::Long : PositionSide::Short,
                             remaining * price, leverage);
    }
}

void LobExchange::recompute_open_interest() {
    double long_base = 0;
    for (const auto& [owner, acc] : accounts_)
        if (acc.position > 0) long_base += acc.position;
    oi_base_ = long_base;
}

SubmitResult LobExchange::submit(const AgentOrder& order) {
    SubmitResult result;
    MarginAccount& acc = ensure_account(order.owner);

    Side side = order.side;
    double quantity = order.quantity;
    if (order.reduce_only) {
        if (acc.position == 0) {
            result.reason = "no open position";
            return result;
        }
        side = acc.position > 0 ? Side::Sell : Side::Buy;
        quantity = std::min(quantity > 0 ? quantity : std::fabs(acc.position),
                            std::fabs(acc.position));
    }
    if (!(quantity > 0)) {
        result.reason = "quantity must be > 0";
        return result;
    }

    const double ref_price = order.kind == OrderKind::Limit
                                 ? order.limit_price
                                 : (side == Side::Buy ? book_.best_ask().value_or(mark_)
                                                      : book_.best_bid().value_or(mark_));
    if (order.kind == OrderKind::Market) {
        const bool empty = side == Side::Buy ? !book_.best_ask() : !book_.best_bid();
        if (empty) {
            result.reason = "market order against an empty book";
            return result;
        }
    }
    if (!order.reduce_only &&
        !margin_precheck(acc, side, quantity, ref_price, order.leverage, &result.reason))
        return result;

    BookOrder incoming;
    incoming.id = next_order_id_++;
    incoming.owner = order.owner;
    incoming.side = side;
    incoming.price = order.limit_price;
    incoming.quantity = quantity;
    incoming.leverage = order.leverage;
    incoming.timestamp = next_timestamp_++;
    incoming.cls = order.cls;

    double unfilled = 0;
    const auto fills = book_.submit(incoming, order.kind, &unfilled);
    for (const auto& f : fills) {
        apply_party_fill(ensure_account(f.buyer), Side::Buy, f.qty, f.price,
                         f.buyer == order.owner ? order.leverage : f.maker_leverage, true);
        apply_party_fill(ensure_account(f.seller), Side::Sell, f.qty, f.price,
                         f.seller == order.owner ? order.leverage : f.maker_leverage, true);
        mark_ = f.price;
        candle_.push(f.price);
        day_.volume += f.qty * f.price;
        result.filled_qty += f.qty;
        result.filled_notional += f.qty * f.price;

        FillRecord rec;
        rec.step = current_step_;
        rec.order_id = incoming.id;
        rec.side = side;
        rec.price = f.price;
        rec.qty = f.qty;
        rec.liquidation = false;
        rec.cls = order.cls;
        rec.owner = order.owner;
        rec.self_match = f.self_match;
        record_fill(rec);
    }
    recompute_open_interest();

    result.accepted = true;
    result.order_id = incoming.id;
    return result;
}

bool LobExchange::cancel_order(std::uint64_t order_id) { return book_.cancel(order_id); }

std::size_t LobExchange::cancel_owner_orders(const std::string& owner) {
    return book_.cancel_all(owner);
}

void LobExchange::begin_day(Date date) {
    day_.reset();
    candle_.start(date, mark_);
}

std::vector<LiquidationEvent> LobExchange::risk_step(std::uint64_t step) {
    current_step_ = step;
    std::vector<LiquidationEvent> events;
    // owners first, so the sweep order is deterministic; the book moves as
    // each forced close executes
    std::vector<std::string> owners;
    owners.reserve(accounts_.size());
    for (const auto& [owner, acc] : accounts_) owners.push_back(owner);

    for (const auto& owner : owners) {
        MarginAccount& acc = accounts_[owner];
        if (acc.position == 0) continue;
        if (acc.margin_ratio(mark_) >= margins_.maintenance_margin) continue;

        const bool was_long = acc.position > 0;
        const double qty = std::fabs(acc.position);
        const Side close_side = was_long ? Side::Sell : Side::Buy;
        const bool empty = close_side == Side::Buy ? !book_.best_ask() : !book_.best_bid();
        if (empty) continue; // nothing to close into; retry next step

        BookOrder incoming;
        incoming.id = next_order_id_++;
        incoming.owner = owner;
        incoming.side = close_side;
        incoming.quantity = qty;
        incoming.leverage = 1;
        incoming.timestamp = next_timestamp_++;

        double unfilled = 0;
        const auto fills = book_.submit(incoming, OrderKind::Market, &unfilled);
        double closed_notional = 0;
        for (const auto& f : fills) {
            apply_party_fill(accounts_[f.buyer], Side::Buy, f.qty, f.price,
                             f.buyer == owner ? 1.0 : f.maker_leverage, f.buyer != owner);
            apply_party_fill(accounts_[f.seller], Side::Sell, f.qty, f.price,
                             f.seller == owner ? 1.0 : f.maker_leverage, f.seller != owner);
            mark_ = f.price;
            candle_.push(f.price);
            day_.volume += f.qty * f.price;
            closed_notional += f.qty * f.price;

            FillRecord rec;
            rec.step = step;
            rec.order_id = incoming.id;
            rec.side = close_side;
            rec.price = f.price;
            rec.qty = f.qty;
            rec.liquidation = true;
            rec.cls = AgentClass::External;
            rec.owner = owner;
            rec.self_match = f.self_match;
            record_fill(rec);
        }
        if (closed_notional > 0) {
            const PositionSide side = was_long ? PositionSide::Long : PositionSide::Short;
            day_.record_liquidation(side, closed_notional);
            LiquidationEvent ev;
            ev.owner = owner;
            ev.side = side;
            ev.notional = closed_notional;
            ev.price = mark_;
            events.push_back(ev);
        }
    }
    recompute_open_interest();
    return events;
}

void LobExchange::close_step(std::uint64_t step) {
    current_step_ = step;
    candle_.push(mark_);
}

ActivityRecord LobExchange::end_day() {
    ActivityRecord rec;
    rec.date = candle_.candle.date;
    rec.volume = day_.volume;
    rec.oi_long = oi_long();
    rec.oi_short = oi_short();
    rec.liq_long = day_.liq_long;
    rec.liq_short = day_.liq_short;
    rec.lev_long = day_.avg_leverage(PositionSide::Long);
    rec.lev_short = day_.avg_leverage(PositionSide::Short);
    return rec;
}

} // namespace perpsim
