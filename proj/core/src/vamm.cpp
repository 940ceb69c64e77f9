#include "perpsim/vamm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace perpsim {
namespace {

constexpr double kTickBase = 1.0001;

void require_positive_amount(double v, const char* op) {
    if (!(v >= 0) || !std::isfinite(v))
        throw DataError(std::string(op) + ": amount must be finite and >= 0");
}

} // namespace

// ---------------------------------------------------------------------------
// LiquidityPosition

double LiquidityPosition::base_at_upper() const {
    return liquidity / std::sqrt(upper_price);
}

double LiquidityPosition::quote_at_lower() const {
    return liquidity * std::sqrt(lower_price);
}

std::pair<double, double> LiquidityPosition::virtual_reserves(double price) const {
    const double p = std::clamp(price, lower_price, upper_price);
    const double sqrt_p = std::sqrt(p);
    return {liquidity / sqrt_p, liquidity * sqrt_p};
}

std::pair<double, double> LiquidityPosition::real_reserves(double price) const {
    const auto [vb, vq] = virtual_reserves(price);
    return to_real(vb, vq);
}

std::pair<double, double> LiquidityPosition::to_real(double virt_base, double virt_quote) const {
    return {virt_base - base_at_upper(), virt_quote - quote_at_lower()};
}

std::pair<double, double> LiquidityPosition::to_virtual(double real_base, double real_quote) const {
    return {real_base + base_at_upper(), real_quote + quote_at_lower()};
}

// ---------------------------------------------------------------------------
// VammPool

VammPool VammPool::uniform(double quote_reserve, double base_reserve, double fee_rate) {
    if (!(quote_reserve >= 0) || !(base_reserve > 0))
        throw DataError("uniform pool needs quote >= 0 and base > 0");
    if (fee_rate < 0 || fee_rate > 0.01) throw DataError("fee rate outside [0, 0.01]");
    VammPool p;
    p.concentrated_ = false;
    p.fee_rate_ = fee_rate;
    p.quote_reserve_ = quote_reserve;
    p.base_reserve_ = base_reserve;
    p.k_ = quote_reserve * base_reserve;
    return p;
}

VammPool VammPool::concentrated(double initial_price, int tick_spacing, double fee_rate) {
    if (!(initial_price > 0)) throw DataError("concentrated pool needs price > 0");
    if (tick_spacing < 1) throw DataError("tick spacing must be >= 1");
    if (fee_rate < 0 || fee_rate > 0.01) throw DataError("fee rate outside [0, 0.01]");
    VammPool p;
    p.concentrated_ = true;
    p.fee_rate_ = fee_rate;
    p.tick_spacing_ = tick_spacing;
    p.sqrt_price_ = std::sqrt(initial_price);
    return p;
}

double VammPool::tick_price(int tick) { return std::pow(kTickBase, tick); }
double VammPool::tick_sqrt_price(int tick) { return std::pow(kTickBase, tick / 2.0); }

int VammPool::price_to_tick(double price) const {
    const double raw = std::log(price) / std::log(kTickBase);
    int tick = static_cast<int>(std::floor(raw / tick_spacing_)) * tick_spacing_;
    // guard against the floor landing one grid step off at exact boundaries
    while (tick_price(tick + tick_spacing_) <= price) tick += tick_spacing_;
    while (tick_price(tick) > price) tick -= tick_spacing_;
    return tick;
}

double VammPool::price() const {
    if (!concentrated_) {
        if (!(base_reserve_ > 0)) throw NumericError("pool price: empty base reserve");
        return quote_reserve_ / base_reserve_;
    }
    return sqrt_price_ * sqrt_price_;
}

double VammPool::price_sensitivity() const {
    if (!concentrated_) {
        if (!(base_reserve_ > 0)) throw NumericError("price_sensitivity: empty base reserve");
        return 2.0 * k_ / (base_reserve_ * base_reserve_ * base_reserve_);
    }
    if (!(liquidity_ > 0)) return std::numeric_limits<double>::infinity();
    // k = L^2 and Q_base = L / sqrt(P) give 2 k / Q^3 = 2 P^(3/2) / L
    return 2.0 * sqrt_price_ * sqrt_price_ * sqrt_price_ / liquidity_;
}

double VammPool::quote_reserve() const {
    if (!concentrated_) return quote_reserve_;
    return liquidity_ * sqrt_price_;
}

double VammPool::base_reserve() const {
    if (!concentrated_) return base_reserve_;
    return liquidity_ > 0 ? liquidity_ / sqrt_price_ : 0.0;
}

double VammPool::invariant_k() const {
    if (!concentrated_) return k_;
    return liquidity_ * liquidity_;
}

double VammPool::active_liquidity() const {
    return concentrated_ ? liquidity_ : std::sqrt(k_);
}

void VammPool::require_concentrated(const char* op) const {
    if (!concentrated_) throw DataError(std::string(op) + ": pool is in uniform mode");
}

std::optional<int> VammPool::next_tick_above() const {
    for (auto it = tick_deltas_.begin(); it != tick_deltas_.end(); ++it)
        if (tick_sqrt_price(it->first) > sqrt_price_) return it->first;
    return std::nullopt;
}

std::optional<int> VammPool::next_tick_below() const {
    for (auto it = tick_deltas_.rbegin(); it != tick_deltas_.rend(); ++it)
        if (tick_sqrt_price(it->first) < sqrt_price_) return it->first;
    return std::nullopt;
}

void VammPool::cross_up(int tick) { liquidity_ += tick_deltas_.at(tick); }
void VammPool::cross_down(int tick) { liquidity_ -= tick_deltas_.at(tick); }

SwapResult VammPool::swap_quote_in(double amount) {
    require_positive_amount(amount, "swap_quote_in");
    SwapResult r;
    if (amount == 0) return r;
    r.amount_in = amount;
    r.fee_paid = amount * fee_rate_;
    double remaining = amount - r.fee_paid;
    fees_quote_ += r.fee_paid;

    if (!concentrated_) {
        const double out = base_reserve_ - (quote_reserve_ * base_reserve_) / (quote_reserve_ + remaining);
        if (!(out < base_reserve_))
            throw DataError("swap_quote_in: swap would drain the base reserve");
        quote_reserve_ += remaining;
        base_reserve_ -= out;
        r.amount_out = out;
        return r;
    }

    while (remaining > 0) {
        const auto boundary = next_tick_above();
        if (liquidity_ <= 0) {
            if (!boundary) throw DataError("swap_quote_in: no liquidity above the current price");
            sqrt_price_ = tick_sqrt_price(*boundary);
            cross_up(*boundary);
            continue;
        }
        const double target_sqrt =
            boundary ? tick_sqrt_price(*boundary) : std::numeric_limits<double>::infinity();
        const double seg_capacity =
            boundary ? liquidity_ * (target_sqrt - sqrt_price_) : std::numeric_limits<double>::infinity();
        if (remaining < seg_capacity) {
            const double new_sqrt = sqrt_price_ + remaining / liquidity_;
            r.amount_out += liquidity_ * (1.0 / sqrt_price_ - 1.0 / new_sqrt);
            sqrt_price_ = new_sqrt;
            remaining = 0;
        } else {
            r.amount_out += liquidity_ * (1.0 / sqrt_price_ - 1.0 / target_sqrt);
            sqrt_price_ = target_sqrt;
            remaining -= seg_capacity;
            cross_up(*boundary);
            if (remaining > 0 && liquidity_ <= 0 && !next_tick_above())
                throw DataError("swap_quote_in: no liquidity above the current price");
        }
    }
    return r;
}

SwapResult VammPool::swap_base_in(double amount) {
    require_positive_amount(amount, "swap_base_in");
    SwapResult r;
    if (amount == 0) return r;
    r.amount_in = amount;
    r.fee_paid = amount * fee_rate_;
    double remaining = amount - r.fee_paid;
    fees_base_ += r.fee_paid;

    if (!concentrated_) {
        const double out = quote_reserve_ - (quote_reserve_ * base_reserve_) / (base_reserve_ + remaining);
        if (!(out < quote_reserve_) && quote_reserve_ > 0)
            throw DataError("swap_base_in: swap would drain the quote reserve");
        base_reserve_ += remaining;
        quote_reserve_ -= out;
        r.amount_out = out;
        return r;
    }

    while (remaining > 0) {
        const auto boundary = next_tick_below();
        if (liquidity_ <= 0) {
            if (!boundary) throw DataError("swap_base_in: no liquidity below the current price");
            cross_down(*boundary);
            sqrt_price_ = tick_sqrt_price(*boundary);
            continue;
        }
        // price falls: 1/sqrt(P') = 1/sqrt(P) + dx / L
        const double inv_sqrt = 1.0 / sqrt_price_;
        const double target_sqrt = boundary ? tick_sqrt_price(*boundary) : 0.0;
        double seg_capacity;
        if (boundary)
            seg_capacity = liquidity_ * (1.0 / target_sqrt - inv_sqrt);
        else
            seg_capacity = std::numeric_limits<double>::infinity();
        if (remaining < seg_capacity) {
            const double new_inv = inv_sqrt + remaining / liquidity_;
            const double new_sqrt = 1.0 / new_inv;
            r.amount_out += liquidity_ * (sqrt_price_ - new_sqrt);
            sqrt_price_ = new_sqrt;
            remaining = 0;
        } else {
            r.amount_out += liquidity_ * (sqrt_price_ - target_sqrt);
            remaining -= seg_capacity;
            sqrt_price_ = target_sqrt;
            cross_down(*boundary);
            if (remaining > 0 && liquidity_ <= 0 && !next_tick_below())
                throw DataError("swap_base_in: no liquidity below the current price");
        }
    }
    return r;
}

SwapResult VammPool::swap_quote_out(double quote_out) {
    require_positive_amount(quote_out, "swap_quote_out");
    SwapResult r;
    if (quote_out == 0) return r;
    r.amount_out = quote_out;

    if (!concentrated_) {
        if (!(quote_out < quote_reserve_))
            throw DataError("swap_quote_out: requested amount drains the quote reserve");
        const double base_net = base_reserve_ * quote_out / (quote_reserve_ - quote_out);
        const double gross = base_net / (1.0 - fee_rate_);
        r.amount_in = gross;
        r.fee_paid = gross - base_net;
        fees_base_ += r.fee_paid;
        base_reserve_ += base_net;
        quote_reserve_ -= quote_out;
        return r;
    }

    double remaining = quote_out;
    double base_net = 0;
    while (remaining > 0) {
        const auto boundary = next_tick_below();
        if (liquidity_ <= 0) {
            if (!boundary) throw DataError("swap_quote_out: no liquidity below the current price");
            cross_down(*boundary);
            sqrt_price_ = tick_sqrt_price(*boundary);
            continue;
        }
        const double target_sqrt = boundary ? tick_sqrt_price(*boundary) : 0.0;
        const double seg_quote = liquidity_ * (sqrt_price_ - target_sqrt);
        if (remaining < seg_quote) {
            const double new_sqrt = sqrt_price_ - remaining / liquidity_;
            base_net += liquidity_ * (1.0 / new_sqrt - 1.0 / sqrt_price_);
            sqrt_price_ = new_sqrt;
            remaining = 0;
        } else {
            if (!boundary || !(target_sqrt > 0))
                throw DataError("swap_quote_out: requested amount drains the pool");
            base_net += liquidity_ * (1.0 / target_sqrt - 1.0 / sqrt_price_);
            remaining -= seg_quote;
            sqrt_price_ = target_sqrt;
            cross_down(*boundary);
            if (remaining > 0 && liquidity_ <= 0 && !next_tick_below())
                throw DataError("swap_quote_out: no liquidity below the current price");
        }
    }
    r.amount_in = base_net / (1.0 - fee_rate_);
    r.fee_paid = r.amount_in - base_net;
    fees_base_ += r.fee_paid;
    return r;
}

SwapResult VammPool::swap_base_out(double base_out) {
    require_positive_amount(base_out, "swap_base_out");
    SwapResult r;
    if (base_out == 0) return r;
    r.amount_out = base_out;

    if (!concentrated_) {
        if (!(base_out < base_reserve_))
            throw DataError("swap_base_out: requested amount drains the base reserve");
        const double quote_net = quote_reserve_ * base_out / (base_reserve_ - base_out);
        const double gross = quote_net / (1.0 - fee_rate_);
        r.amount_in = gross;
        r.fee_paid = gross - quote_net;
        fees_quote_ += r.fee_paid;
        quote_reserve_ += quote_net;
        base_reserve_ -= base_out;
        return r;
    }

    double remaining = base_out;
    double quote_net = 0;
    while (remaining > 0) {
        const auto boundary = next_tick_above();
        if (liquidity_ <= 0) {
            if (!boundary) throw DataError("swap_base_out: no liquidity above the current price");
            sqrt_price_ = tick_sqrt_price(*boundary);
            cross_up(*boundary);
            continue;
        }
        const double target_sqrt =
            boundary ? tick_sqrt_price(*boundary) : std::numeric_limits<double>::infinity();
        const double seg_base =
            boundary ? liquidity_ * (1.0 / sqrt_price_ - 1.0 / target_sqrt)
                     : liquidity_ / sqrt_price_;
        if (remaining < seg_base) {
            const double new_inv = 1.0 / sqrt_price_ - remaining / liquidity_;
            const double new_sqrt = 1.0 / new_inv;
            quote_net += liquidity_ * (new_sqrt - sqrt_price_);
            sqrt_price_ = new_sqrt;
            remaining = 0;
        } else {
            if (!boundary)
                throw DataError("swap_base_out: requested amount drains the base reserve");
            quote_net += liquidity_ * (target_sqrt - sqrt_price_);
            remaining -= seg_base;
            sqrt_price_ = target_sqrt;
            cross_up(*boundary);
            if (remaining > 0 && liquidity_ <= 0 && !next_tick_above())
                throw DataError("swap_base_out: no liquidity above the current price");
        }
    }
    r.amount_in = quote_net / (1.0 - fee_rate_);
    r.fee_paid = r.amount_in - quote_net;
    fees_quote_ += r.fee_paid;
    return r;
}

SwapResult VammPool::swap_to_price(double target_price) {
    if (!(target_price > 0)) throw DataError("swap_to_price: target must be > 0");
    const double current = price();
    if (target_price == current) return {};
    if (!concentrated_) {
        if (target_price > current) {
            const double target_quote = std::sqrt(k_ * target_price);
            const double net = target_quote - quote_reserve_;
            return swap_quote_in(net / (1.0 - fee_rate_));
        }
        const double target_base = std::sqrt(k_ / target_price);
        const double net = target_base - base_reserve_;
        return swap_base_in(net / (1.0 - fee_rate_));
    }

    const double target_sqrt = std::sqrt(target_price);
    SwapResult total;
    if (target_sqrt > sqrt_price_) {
        while (sqrt_price_ < target_sqrt) {
            const auto boundary = next_tick_above();
            if (liquidity_ <= 0) {
                if (!boundary || tick_sqrt_price(*boundary) > target_sqrt) {
                    sqrt_price_ = target_sqrt; // empty segment: price moves freely
                    break;
                }
                sqrt_price_ = tick_sqrt_price(*boundary);
                cross_up(*boundary);
                continue;
            }
            const double stop =
                boundary ? std::min(target_sqrt, tick_sqrt_price(*boundary)) : target_sqrt;
            const double dy = liquidity_ * (stop - sqrt_price_);
            total.amount_out += liquidity_ * (1.0 / sqrt_price_ - 1.0 / stop);
            total.amount_in += dy;
            sqrt_price_ = stop;
            if (boundary && stop == tick_sqrt_price(*boundary)) cross_up(*boundary);
        }
        const double gross = total.amount_in / (1.0 - fee_rate_);
        total.fee_paid = gross - total.amount_in;
        total.amount_in = gross;
        fees_quote_ += total.fee_paid;
    } else {
        while (sqrt_price_ > target_sqrt) {
            const auto boundary = next_tick_below();
            if (liquidity_ <= 0) {
                if (!boundary || tick_sqrt_price(*boundary) < target_sqrt) {
                    sqrt_price_ = target_sqrt;
                    break;
                }
                cross_down(*boundary);
                sqrt_price_ = tick_sqrt_price(*boundary);
                continue;
            }
            const double stop =
                boundary ? std::max(target_sqrt, tick_sqrt_price(*boundary)) : target_sqrt;
            total.amount_in += liquidity_ * (1.0 / stop - 1.0 / sqrt_price_);
            total.amount_out += liquidity_ * (sqrt_price_ - stop);
            sqrt_price_ = stop;
            if (boundary && stop == tick_sqrt_price(*boundary)) cross_down(*boundary);
        }
        const double gross = total.amount_in / (1.0 - fee_rate_);
        total.fee_paid = gross - total.amount_in;
        total.amount_in = gross;
        fees_base_ += total.fee_paid;
    }
    return total;
}

std::size_t VammPool::add_liquidity(const std::string& owner, double lower_price,
                                    double upper_price, double base_amount, double quote_amount,
                                    double leverage) {
    require_concentrated("add_liquidity");
    if (!(lower_price > 0) || !(upper_price > lower_price))
        throw DataError("add_liquidity: inverted or empty price range");
    if (base_amount < 0 || quote_amount < 0)
        throw DataError("add_liquidity: negative amounts");
    if (!(leverage >= 1)) throw DataError("add_liquidity: leverage must be >= 1");

    LiquidityPosition pos;
    pos.owner = owner;
    pos.lower_tick = price_to_tick(lower_price);
    pos.upper_tick = price_to_tick(upper_price);
    if (tick_price(pos.upper_tick) < upper_price) pos.upper_tick += tick_spacing_;
    if (pos.upper_tick <= pos.lower_tick) pos.upper_tick = pos.lower_tick + tick_spacing_;
    pos.lower_price = tick_price(pos.lower_tick);
    pos.upper_price = tick_price(pos.upper_tick);
    pos.leverage = leverage;
    pos.entry_price = price();

    const double sqrt_lower = tick_sqrt_price(pos.lower_tick);
    const double sqrt_upper = tick_sqrt_price(pos.upper_tick);
    const double p = price();

    if (p <= pos.lower_price) {
        if (quote_amount != 0)
            throw DataError("add_liquidity: below-range position takes base only");
        if (!(base_amount > 0)) throw DataError("add_liquidity: zero liquidity");
        pos.liquidity = base_amount / (1.0 / sqrt_lower - 1.0 / sqrt_upper);
    } else if (p >= pos.upper_price) {
        if (base_amount != 0)
            throw DataError("add_liquidity: above-range position takes quote only");
        if (!(quote_amount > 0)) throw DataError("add_liquidity: zero liquidity");
        pos.liquidity = quote_amount / (sqrt_upper - sqrt_lower);
    } else {
        if (!(base_amount > 0) || !(quote_amount > 0))
            throw DataError("add_liquidity: in-range position needs both amounts");
        const double l_base = base_amount / (1.0 / sqrt_price_ - 1.0 / sqrt_upper);
        const double l_quote = quote_amount / (sqrt_price_ - sqrt_lower);
        if (std::fabs(l_base - l_quote) > 1e-6 * std::max(l_base, l_quote))
            throw DataError("add_liquidity: amounts inconsistent with the in-range composition");
        pos.liquidity = l_quote;
    }

    pos.minted_base = base_amount;
    pos.minted_quote = quote_amount;
    pos.collateral = (base_amount * p + quote_amount) / leverage;

    tick_deltas_[pos.lower_tick] += pos.liquidity;
    tick_deltas_[pos.upper_tick] -= pos.liquidity;
    if (p > pos.lower_price && p < pos.upper_price) liquidity_ += pos.liquidity;

    positions_.push_back(pos);
    return positions_.size() - 1;
}

std::pair<double, double> VammPool::remove_liquidity(std::size_t position_id) {
    require_concentrated("remove_liquidity");
    LiquidityPosition& pos = position(position_id);
    if (!pos.active) throw DataError("remove_liquidity: position already burned");
    const double p = price();
    const auto [real_base, real_quote] = pos.real_reserves(p);

    tick_deltas_[pos.lower_tick] -= pos.liquidity;
    tick_deltas_[pos.upper_tick] += pos.liquidity;
    if (tick_deltas_[pos.lower_tick] == 0) tick_deltas_.erase(pos.lower_tick);
    if (tick_deltas_[pos.upper_tick] == 0) tick_deltas_.erase(pos.upper_tick);
    if (p > pos.lower_price && p < pos.upper_price) liquidity_ -= pos.liquidity;
    pos.active = false;
    return {real_base, real_quote};
}

LiquidityPosition& VammPool::position(std::size_t id) {
    if (id >= positions_.size()) throw DataError("unknown liquidity position id");
    return positions_[id];
}

std::vector<LiquidityBucket> VammPool::liquidity_distribution(
    std::span<const double> grid_edges) const {
    require_concentrated("liquidity_distribution");
    if (grid_edges.size() < 2) throw DataError("liquidity_distribution: empty grid");
    if (tick_deltas_.empty()) throw DataError("liquidity_distribution: empty tick map");
    for (std::size_t i = 1; i < grid_edges.size(); ++i)
        if (!(grid_edges[i] > grid_edges[i - 1]))
            throw DataError("liquidity_distribution: grid edges must be ascending");

    std::vector<LiquidityBucket> out;
    out.reserve(grid_edges.size() - 1);
    for (std::size_t i = 0; i + 1 < grid_edges.size(); ++i) {
        LiquidityBucket b;
        b.bucket_low = grid_edges[i];
        b.bucket_high = grid_edges[i + 1];
        const double mid = 0.5 * (b.bucket_low + b.bucket_high);
        for (const auto& pos : positions_) {
            if (!pos.active) continue;
            if (mid >= pos.lower_price && mid < pos.upper_price) b.liquidity += pos.liquidity;
        }
        out.push_back(b);
    }
    return out;
}

// ---------------------------------------------------------------------------
// VammClearingHouse

VammClearingHouse::VammClearingHouse(VammPool pool, MarginParams margins)
    : pool_(std::move(pool)), margins_(margins) {}

MarginAccount& VammClearingHouse::account(const std::string& owner) {
    auto& acc = accounts_[owner];
    if (acc.owner.empty()) acc.owner = owner;
    return acc;
}

TradeResult VammClearingHouse::open_position(const std::string& owner, PositionSide side,
                                             double margin, double leverage) {
    TradeResult result;
    if (!(margin > 0)) {
        result.reason = "margin must be > 0";
        return result;
    }
    if (!(leverage >= 1) || leverage > margins_.max_leverage) {
        result.reason = "leverage outside [1, max]";
        return result;
    }
    MarginAccount& acc = account(owner);
    const double notional = margin * leverage;
    const double mark = pool_.price();

    // post-trade margin check at the pre-trade mark
    const double base_estimate = notional / mark;
    const double post_position =
        acc.position + (side == PositionSide::Long ? base_estimate : -base_estimate);
    const double post_notional = std::fabs(post_position) * mark;
    if (acc.equity(mark) + margin < margins_.initial_margin * post_notional) {
        result.reason = "initial margin check failed";
        return result;
    }

    VammPool saved = pool_;
    try {
        if (side == PositionSide::Long) {
            const SwapResult swap = pool_.swap_quote_in(notional);
            acc.position += swap.amount_out;
            result.base = swap.amount_out;
        } else {
            const SwapResult swap = pool_.swap_quote_out(notional);
            acc.position -= swap.amount_in;
            result.base = swap.amount_in;
        }
    } catch (const DataError& e) {
        pool_ = std::move(saved);
        result.reason = e.what();
        return result;
    }

    acc.collateral += margin;
    acc.entry_notional += notional;
    acc.entry_leverage = leverage;
    if (side == PositionSide::Long) oi_long_ += notional;
    else oi_short_ += notional;
    day_volume += notional;

    result.ok = true;
    result.notional = notional;
    result.fill_price = notional / result.base;
    return result;
}

TradeResult VammClearingHouse::close_position(const std::string& owner, double fraction) {
    TradeResult result;
    MarginAccount& acc = account(owner);
    if (acc.position == 0) {
        result.reason = "no open position";
        return result;
    }
    if (!(fraction > 0) || fraction > 1) {
        result.reason = "fraction outside (0, 1]";
        return result;
    }

    const double base = std::fabs(acc.position) * fraction;
    const double entry_share = acc.entry_notional * fraction;
    const bool was_long = acc.position > 0;

    VammPool saved = pool_;
    double executed = 0;
    try {
        if (was_long) {
            const SwapResult swap = pool_.swap_base_in(base);
            executed = swap.amount_out;
            acc.realized_pnl += executed - entry_share;
            acc.collateral += executed - entry_share;
            acc.position -= base;
        } else {
            const SwapResult swap = pool_.swap_base_out(base);
            executed = swap.amount_in;
            acc.realized_pnl += entry_share - executed;
            acc.collateral += entry_share - executed;
            acc.position += base;
        }
    } catch (const DataError& e) {
        pool_ = std::move(saved);
        result.reason = e.what();
        return result;
    }

    acc.entry_notional -= entry_share;
    if (std::fabs(acc.position) < 1e-15) {
        acc.position = 0;
        acc.entry_notional = 0;
    }
    if (was_long) oi_long_ = std::max(0.0, oi_long_ - entry_share);
    else oi_short_ = std::max(0.0, oi_short_ - entry_share);
    day_volume += executed;

    result.ok = true;
    result.base = base;
    result.notional = executed;
    result.fill_price = executed / base;
    return result;
}

std::size_t VammClearingHouse::add_liquidity(const std::string& owner, double lower_price,
                                             double upper_price, double base_amount,
                                             double quote_amount, double leverage) {
    if (!(leverage >= 1) || leverage > margins_.max_leverage)
        throw DataError("add_liquidity: leverage outside [1, max]");
    return pool_.add_liquidity(owner, lower_price, upper_price, base_amount, quote_amount,
                               leverage);
}

double VammClearingHouse::lp_liability(const LiquidityPosition& pos, double price) const {
    return pos.minted_base * price + pos.minted_quote;
}

double VammClearingHouse::lp_equity(const LiquidityPosition& pos, double price) const {
    const auto [real_base, real_quote] = pos.real_reserves(price);
    const double holdings = real_base * price + real_quote;
    return pos.collateral + holdings - lp_liability(pos, price);
}

std::vector<LiquidationEvent> VammClearingHouse::liquidate_sweep() {
    std::vector<LiquidationEvent> events;

    // traders first; accounts_ is ordered by owner so sweeps are deterministic
    for (auto& [owner, acc] : accounts_) {
        if (acc.position == 0) continue;
        const double mark = pool_.price();
        if (acc.margin_ratio(mark) >= margins_.maintenance_margin) continue;
        const bool was_long = acc.position > 0;
        const TradeResult closed = close_position(owner, 1.0);
        if (!closed.ok) continue; // pool cannot absorb it; skip rather than corrupt state
        LiquidationEvent ev;
        ev.owner = owner;
        ev.side = was_long ? PositionSide::Long : PositionSide::Short;
        ev.notional = closed.notional;
        ev.price = pool_.price();
        events.push_back(ev);
        if (was_long) day_liq_long += closed.notional;
        else day_liq_short += closed.notional;
    }

    if (pool_.is_concentrated()) {
        for (std::size_t id = 0; id < pool_.positions().size(); ++id) {
            const LiquidityPosition& pos = pool_.positions()[id];
            if (!pos.active || pos.leverage <= 1.0) continue;
            const double p = pool_.price();
            const double liability = lp_liability(pos, p);
            if (liability <= 0) continue;
            if (lp_equity(pos, p) / liability >= margins_.maintenance_margin) continue;

            const auto [red_base, red_quote] = pool_.remove_liquidity(id);
            const double redeemed_value = red_base * p + red_quote;
            // settle the base leg against the pool (moves the price)
            const double net_base = red_base - pos.minted_base;
            double quote_flow = red_quote - pos.minted_quote;
            try {
                if (net_base < 0) quote_flow -= pool_.swap_base_out(-net_base).amount_in;
                else if (net_base > 0) quote_flow += pool_.swap_base_in(net_base).amount_out;
            } catch (const DataError&) {
                // pool too thin for the settlement leg; collateral absorbs it
            }
            LiquidityPosition& mut = pool_.position(id);
            mut.collateral = std::max(0.0, mut.collateral + quote_flow);

            LiquidationEvent ev;
            ev.owner = pos.owner;
            ev.is_lp = true;
            // passive LP liquidation during a price rise closes short exposure
            ev.side = p >= pos.entry_price ? PositionSide::Short : PositionSide::Long;
            ev.notional = redeemed_value;
            ev.price = pool_.price();
            events.push_back(ev);
            if (ev.side == PositionSide::Long) day_liq_long += ev.notional;
            else day_liq_short += ev.notional;
        }
    }
    return events;
}

double VammClearingHouse::total_account_base() const {
    double total = 0;
    for (const auto& [owner, acc] : accounts_) total += acc.position;
    return total;
}

} // namespace perpsim
