#pragma once

#include "perpsim/errors.hpp"
#include "perpsim/margin.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace perpsim {

struct SwapResult {
    double amount_in = 0;  // gross, fee included
    double amount_out = 0;
    double fee_paid = 0;   // in the input token
};

/// Tick-ranged liquidity position. Liquidity L relates virtual reserves to
/// price by base = L / sqrt(P), quote = L * sqrt(P); the position is active
/// while the pool price is inside [lower_price, upper_price].
struct LiquidityPosition {
    std::string owner;
    int lower_tick = 0;
    int upper_tick = 0;
    double lower_price = 0; // price at lower_tick
    double upper_price = 0; // price at upper_tick
    double liquidity = 0;

    double minted_base = 0;  // virtual tokens placed at entry (the liability)
    double minted_quote = 0;
    double collateral = 0;   // USD backing the mint
    double leverage = 1;
    double entry_price = 0;
    bool active = true;

    /// Corner reserves of the range (the real-space origin offsets).
    double base_at_upper() const;  // L / sqrt(upper_price)
    double quote_at_lower() const; // L * sqrt(lower_price)

    /// Virtual reserves at price clamped into the range.
    std::pair<double, double> virtual_reserves(double price) const;
    /// Real reserves: virtual minus the corner offsets.
    std::pair<double, double> real_reserves(double price) const;

    /// The affine real<->virtual maps of the range geometry.
    std::pair<double, double> to_real(double virt_base, double virt_quote) const;
    std::pair<double, double> to_virtual(double real_base, double real_quote) const;
};

struct LiquidityBucket {
    double bucket_low = 0;
    double bucket_high = 0;
    double liquidity = 0;
};

/// Constant-product pricing pool over virtual token reserves.
///
/// Uniform mode holds explicit reserves with invariant k = quote * base.
/// Concentrated mode holds a tick map of ranged positions; each tick segment
/// behaves as a constant-product curve on that segment's virtual reserves
/// (piecewise-constant k). Fees are charged on the input amount before the
/// curve and accrue outside the reserves, so k is preserved exactly by swaps.
class VammPool {
public:
    /// Uniform pool with explicit virtual reserves.
    static VammPool uniform(double quote_reserve, double base_reserve, double fee_rate = 0.0);
    /// Concentrated pool starting at `initial_price` with no liquidity.
    static VammPool concentrated(double initial_price, int tick_spacing = 60,
                                 double fee_rate = 0.0);

    bool is_concentrated() const { return concentrated_; }
    double fee_rate() const { return fee_rate_; }
    int tick_spacing() const { return tick_spacing_; }

    /// Quote per base unit: quote_reserve / base_reserve.
    double price() const;

    /// |dP/dQ_base| = 2 k / Q_base^3 of the active curve.
    double price_sensitivity() const;

    double quote_reserve() const;
    double base_reserve() const;
    double invariant_k() const;
    double active_liquidity() const;

    /// Swap quote into the pool for base (price rises).
    SwapResult swap_quote_in(double amount);
    /// Swap base into the pool for quote (price falls).
    SwapResult swap_base_in(double amount);
    /// Swap base in for an exact quote amount out.
    SwapResult swap_quote_out(double quote_out);
    /// Swap quote in for an exact base amount out.
    SwapResult swap_base_out(double base_out);
    /// Trade until the pool trades at `target_price`. Returns the swap executed
    /// (amount_in == 0 when already there).
    SwapResult swap_to_price(double target_price);

    /// Adds a tick-ranged position (concentrated mode only). The requested
    /// price range snaps outward to the tick grid. When the current price is
    /// inside the range, both amounts must be consistent with the in-range
    /// composition (<= 1e-6 relative); out-of-range positions are single-sided.
    std::size_t add_liquidity(const std::string& owner, double lower_price, double upper_price,
                              double base_amount, double quote_amount, double leverage = 1.0);

    /// Burns a position and returns {base, quote} redeemed at the current price.
    std::pair<double, double> remove_liquidity(std::size_t position_id);

    const std::vector<LiquidityPosition>& positions() const { return positions_; }
    LiquidityPosition& position(std::size_t id);

    /// Active liquidity per price bucket: for each grid cell, the sum of L over
    /// positions whose range covers the cell midpoint. Grid must be an
    /// ascending list of bucket edges with at least two entries.
    std::vector<LiquidityBucket> liquidity_distribution(std::span<const double> grid_edges) const;

    double fees_collected_quote() const { return fees_quote_; }
    double fees_collected_base() const { return fees_base_; }

    static double tick_price(int tick);
    static double tick_sqrt_price(int tick);
    int price_to_tick(double price) const; // floored to the spacing grid

private:
    VammPool() = default;

    void cross_up(int tick);
    void cross_down(int tick);
    std::optional<int> next_tick_above() const;
    std::optional<int> next_tick_below() const;
    void require_concentrated(const char* op) const;

    bool concentrated_ = false;
    double fee_rate_ = 0;

    // uniform mode
    double quote_reserve_ = 0;
    double base_reserve_ = 0;
    double k_ = 0;

    // concentrated mode
    int tick_spacing_ = 60;
    double sqrt_price_ = 0;
    double liquidity_ = 0;                  // active L at the current price
    std::map<int, double> tick_deltas_;     // net L change when crossing up
    std::vector<LiquidityPosition> positions_;

    double fees_quote_ = 0;
    double fees_base_ = 0;
};

struct TradeResult {
    bool ok = false;
    std::string reason;
    double fill_price = 0;
    double base = 0;     // base units moved
    double notional = 0; // USD notional executed
};

/// Routes trader orders into the pool, mints/burns virtual tokens, tracks
/// accounts, open interest and the daily aggregates. Single-writer.
class VammClearingHouse {
public:
    VammClearingHouse(VammPool pool, MarginParams margins);

    VammPool& pool() { return pool_; }
    const VammPool& pool() const { return pool_; }
    const MarginParams& margins() const { return margins_; }

    double mark_price() const { return pool_.price(); }

    MarginAccount& account(const std::string& owner);
    const std::map<std::string, MarginAccount>& accounts() const { return accounts_; }

    /// Deposits `margin` and swaps margin*leverage notional through the pool.
    /// Long swaps quote in for base; short is the mirror (base in for exact
    /// quote out). Rejected orders leave all state untouched.
    TradeResult open_position(const std::string& owner, PositionSide side, double margin,
                              double leverage);

    /// Closes |fraction| of the account position against the pool.
    TradeResult close_position(const std::string& owner, double fraction = 1.0);

    /// Adds a leveraged liquidity position through the clearing house.
    std::size_t add_liquidity(const std::string& owner, double lower_price, double upper_price,
                              double base_amount, double quote_amount, double leverage);

    /// Force-closes every trader account and leveraged LP position below
    /// maintenance margin. Executes as market swaps against the pool, so each
    /// event moves the price; eligibility is re-read as the sweep progresses.
    /// Trader events are labeled by position side; LP events by price
    /// direction versus entry (rise -> liquidation on short).
    std::vector<LiquidationEvent> liquidate_sweep();

    double oi_long() const { return oi_long_; }
    double oi_short() const { return oi_short_; }

    /// Daily accumulators (reset by the exchange adapter at day boundaries).
    double day_volume = 0;
    double day_liq_long = 0;
    double day_liq_short = 0;

    /// Funding hook: called once per day by the exchange adapter; receives the
    /// clearing house and returns per-account transfers. Defaults to nothing
    /// (zero transfer); the accounting slot is kept visible for variants that
    /// implement a concrete funding rule.
    std::function<void(VammClearingHouse&)> funding_hook;

    void apply_funding() {
        if (funding_hook) funding_hook(*this);
    }

    /// Sum of base units credited to trader accounts (conservation checks).
    double total_account_base() const;

private:
    double lp_equity(const LiquidityPosition& pos, double price) const;
    double lp_liability(const LiquidityPosition& pos, double price) const;

    VammPool pool_;
    MarginParams margins_;
    std::map<std::string, MarginAccount> accounts_;
    double oi_long_ = 0;
    double oi_short_ = 0;
};

} // namespace perpsim
