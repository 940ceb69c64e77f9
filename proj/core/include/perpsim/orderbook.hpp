#pragma once

#include "perpsim/exchange.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace perpsim {

/// Resting limit order.
struct BookOrder {
    std::uint64_t id = 0;
    std::string owner;
    Side side = Side::Buy;
    double price = 0;
    double quantity = 0; // remaining
    double leverage = 1;
    std::uint64_t timestamp = 0; // logical, strictly increasing
    AgentClass cls = AgentClass::External;
};

/// One match between an incoming order and a resting order. Trade price is
/// the resting order's limit price.
struct BookFill {
    std::uint64_t taker_id = 0;
    std::uint64_t maker_id = 0;
    std::string buyer;
    std::string seller;
    std::string maker_owner;
    double price = 0;
    double qty = 0;
    double maker_leverage = 1;
    double taker_leverage = 1;
    bool self_match = false;
};

/// Price-time priority book: both sides are price-ordered queues with FIFO
/// within each price level. After matching completes the book is never
/// crossed.
class OrderBook {
public:
    /// Matches the incoming order against the book. Limit remainders rest;
    /// market remainders are dropped (reported via `unfilled`).
    std::vector<BookFill> submit(BookOrder order, OrderKind kind, double* unfilled = nullptr);

    bool cancel(std::uint64_t order_id);
    /// Cancels every resting order of one owner; returns the count removed.
    std::size_t cancel_all(const std::string& owner);

    std::optional<double> best_bid() const;
    std::optional<double> best_ask() const;
    bool crossed() const;

    double depth(Side side) const; // total resting base units
    std::size_t open_orders() const;

private:
    template <typename Map>
    std::vector<BookFill> match_against(Map& levels, BookOrder& incoming, bool incoming_is_buy,
                                        double limit, OrderKind kind);

    std::map<double, std::deque<BookOrder>, std::greater<double>> bids_;
    std::map<double, std::deque<BookOrder>> asks_;
};

} // namespace perpsim
