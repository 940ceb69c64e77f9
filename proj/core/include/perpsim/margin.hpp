#pragma once

#include <limits>
#include <string>

namespace perpsim {

enum class PositionSide { Long, Short };

inline const char* to_string(PositionSide s) {
    return s == PositionSide::Long ? "long" : "short";
}

struct MarginParams {
    double maintenance_margin = 0.0625;
    double initial_margin = 0.10;
    double max_leverage = 10.0;
};

/// Cross-margin account: one collateral pool backs the whole signed position.
struct MarginAccount {
    std::string owner;
    double collateral = 0;
    double position = 0;       // signed base units, positive = long
    double entry_notional = 0; // USD notional at entry, >= 0
    double realized_pnl = 0;
    double entry_leverage = 0; // leverage of the latest opening order

    double avg_entry_price() const {
        return position != 0 ? entry_notional / (position < 0 ? -position : position) : 0.0;
    }
    double unrealized_pnl(double mark) const {
        return position == 0 ? 0.0 : position * (mark - avg_entry_price());
    }
    double equity(double mark) const { return collateral + unrealized_pnl(mark); }
    double notional(double mark) const { return (position < 0 ? -position : position) * mark; }
    /// equity / notional at mark; +inf when flat.
    double margin_ratio(double mark) const {
        const double n = notional(mark);
        if (n <= 0) return std::numeric_limits<double>::infinity();
        return equity(mark) / n;
    }
};

struct LiquidationEvent {
    std::string owner;
    PositionSide side = PositionSide::Long;
    double notional = 0; // USD volume force-closed
    double price = 0;    // execution price (pool price after, or mark)
    bool is_lp = false;  // passive liquidity-provider liquidation
};

} // namespace perpsim
