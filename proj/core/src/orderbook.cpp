#include "perpsim/orderbook.hpp"

#include "perpsim/errors.hpp"

#include <algorithm>
#include <limits>

namespace perpsim {

template <typename Map>
std::vector<BookFill> OrderBook::match_against(Map& levels, BookOrder& incoming,
                                               bool incoming_is_buy, double limit,
                                               OrderKind kind) {
    std::vector<BookFill> fills;
    while (incoming.quantity > 0 && !levels.empty()) {
        auto level = levels.begin();
        const double level_price = level->first;
        if (kind == OrderKind::Limit) {
            if (incoming_is_buy && level_price > limit) break;
            if (!incoming_is_buy && level_price < limit) break;
        }
        auto& queue = level->second;
        while (incoming.quantity > 0 && !queue.empty()) {
            BookOrder& resting = queue.front();
            const double qty = std::min(incoming.quantity, resting.quantity);
            BookFill fill;
            fill.taker_id = incoming.id;
            fill.maker_id = resting.id;
            fill.maker_owner = resting.owner;
            fill.buyer = incoming_is_buy ? incoming.owner : resting.owner;
            fill.seller = incoming_is_buy ? resting.owner : incoming.owner;
            fill.price = resting.price;
            fill.qty = qty;
            fill.maker_leverage = resting.leverage;
            fill.taker_leverage = incoming.leverage;
            fill.self_match = incoming.owner == resting.owner;
            fills.push_back(fill);
            incoming.quantity -= qty;
            resting.quantity -= qty;
            if (resting.quantity <= 0) queue.pop_front();
        }
        if (queue.empty()) levels.erase(level);
    }
    return fills;
}

std::vector<BookFill> OrderBook::submit(BookOrder order, OrderKind kind, double* unfilled) {
    if (!(order.quantity > 0)) throw DataError("order quantity must be > 0");
    if (kind == OrderKind::Limit && !(order.price > 0))
        throw DataError("limit order must carry a positive price");

    std::vector<BookFill> fills;
    const double limit = kind == OrderKind::Limit ? order.price
                                                  : std::numeric_limits<double>::quiet_NaN();
    if (order.side == Side::Buy)
        fills = match_against(asks_, order, true, limit, kind);
    else
        fills = match_against(bids_, order, false, limit, kind);

    if (order.quantity > 0) {
        if (kind == OrderKind::Limit) {
            if (order.side == Side::Buy)
                bids_[order.price].push_back(order);
            else
                asks_[order.price].push_back(order);
            if (unfilled) *unfilled = 0;
        } else if (unfilled) {
            *unfilled = order.quantity;
        }
    } else if (unfilled) {
        *unfilled = 0;
    }
    return fills;
}

bool OrderBook::cancel(std::uint64_t order_id) {
    auto scan = [&](auto& levels) {
        for (auto it = levels.begin(); it != levels.end(); ++it) {
            auto& queue = it->second;
            for (auto q = queue.begin(); q != queue.end(); ++q) {
                if (q->id == order_id) {
                    queue.erase(q);
                    if (queue.empty()) levels.erase(it);
                    return true;
                }
            }
        }
        return false;
    };
    return scan(bids_) || scan(asks_);
}

std::size_t OrderBook::cancel_all(const std::string& owner) {
    std::size_t removed = 0;
    auto scan = [&](auto& levels) {
        for (auto it = levels.begin(); it != levels.end();) {
            auto& queue = it->second;
            for (auto q = queue.begin(); q != queue.end();) {
                if (q->owner == owner) {
                    q = queue.erase(q);
                    ++removed;
                } else {
                    ++q;
                }
            }
            it = queue.empty() ? levels.erase(it) : std::next(it);
        }
    };
    scan(bids_);
    scan(asks_);
    return removed;
}

std::optional<double> OrderBook::best_bid() const {
    if (bids_.empty()) return std::nullopt;
    return bids_.begin()->first;
}

std::optional<double> OrderBook::best_ask() const {
    if (asks_.empty()) return std::nullopt;
    return asks_.begin()->first;
}

bool OrderBook::crossed() const {
    const auto bid = best_bid();
    const auto ask = best_ask();
    return bid && ask && *bid >= *ask;
}

double OrderBook::depth(Side side) const {
    double total = 0;
    if (side == Side::Buy)
        for (const auto& [price, queue] : bids_)
            for (const auto& o : queue) total += o.quantity;
    else
        for (const auto& [price, queue] : asks_)
            for (const auto& o : queue) total += o.quantity;
    return total;
}

std::size_t OrderBook::open_orders() const {
    std::size_t n = 0;
    for (const auto& [price, queue] : bids_) n += queue.size();
    for (const auto& [price, queue] : asks_) n += queue.size();
    return n;
}

} // namespace perpsim
