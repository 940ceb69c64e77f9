#include "perpsim/agents.hpp"

#include "perpsim/errors.hpp"
#include "perpsim/lob_exchange.hpp"
#include "perpsim/vamm_exchange.hpp"

#include <algorithm>
#include <cmath>

namespace perpsim {

PriceProcess::Kind price_process_kind_from_string(const std::string& s) {
    if (s == "gbm" || s == "geometric-brownian") return PriceProcess::Kind::GeometricBrownian;
    if (s == "jump-diffusion" || s == "jd") return PriceProcess::Kind::JumpDiffusion;
    throw DataError("unknown price process '" + s + "' (expected gbm|jump-diffusion)");
}

std::vector<Candle> PricePath::daily_candles() const {
    std::vector<Candle> out;
    const int n_days = days();
    out.reserve(static_cast<std::size_t>(n_days));
    for (int d = 0; d < n_days; ++d) {
        CandleBuilder builder;
        builder.start(start_date + d, day_open(d));
        for (int s = 0; s < steps_per_day; ++s) builder.push(step(d, s));
        out.push_back(builder.finish());
    }
    return out;
}

PricePath generate_price_path(const PriceProcess& process, Date start, int days) {
    if (days < 1) throw DataError("generate_price_path: days must be >= 1");
    if (process.steps_per_day < 1) throw DataError("generate_price_path: steps_per_day >= 1");
    if (process.vol_per_sqrt_year < 0) throw DataError("generate_price_path: negative volatility");

    Rng rng(process.seed);
    Rng vol_rng = rng.fork("vol-cluster");
    Rng jump_rng = rng.fork("jumps");

    PricePath path;
    path.initial_price = process.initial_price;
    path.steps_per_day = process.steps_per_day;
    path.start_date = start;
    path.step_prices.reserve(static_cast<std::size_t>(days) * process.steps_per_day);

    const double dt = 1.0 / (365.0 * process.steps_per_day);
    const double sqrt_dt = std::sqrt(dt);
    double price = process.initial_price;
    double log_vol_state = 0.0;

    for (int d = 0; d < days; ++d) {
        if (process.vol_persistence > 0 && process.vol_of_vol > 0)
            log_vol_state = process.vol_persistence * log_vol_state +
                            process.vol_of_vol * vol_rng.normal();
        const double sigma = process.vol_per_sqrt_year * std::exp(log_vol_state);
        for (int s = 0; s < process.steps_per_day; ++s) {
            const double diffusion =
                (process.drift_per_year - 0.5 * sigma * sigma) * dt + sigma * sqrt_dt * rng.normal();
            double jump = 0.0;
            if (process.kind == PriceProcess::Kind::JumpDiffusion &&
                process.jump_intensity_per_year > 0) {
                const int jumps = jump_rng.poisson(process.jump_intensity_per_year * dt);
                for (int j = 0; j < jumps; ++j) jump += jump_rng.normal(0.0, process.jump_log_sd);
            }
            price *= std::exp(diffusion + jump);
            path.step_prices.push_back(price);
        }
    }
    return path;
}

std::vector<Candle> generate_path(const PriceProcess& process, Date start, int days) {
    return generate_price_path(process, start, days).daily_candles();
}

// ---------------------------------------------------------------------------
// Population

Population::Population(std::vector<TraderSpec> specs, const Rng& root) {
    for (auto& spec : specs) {
        ClassState cs;
        cs.spec = spec;
        cs.rng = root.fork(std::string("class:") + to_string(spec.cls));
        Rng setup = cs.rng.fork("setup");
        for (int i = 0; i < spec.count; ++i) {
            Agent agent;
            agent.id = std::string(to_string(spec.cls)) + "-" + std::to_string(i);
            agent.cls = spec.cls;
            agent.wealth = setup.lognormal(std::log(spec.wealth_median), spec.wealth_log_sd);
            agent.leverage = setup.uniform(spec.leverage_min, spec.leverage_max);
            agent.rebalance_offset =
                spec.rebalance_period > 0 ? i % spec.rebalance_period : 0;
            cs.members.push_back(agents_.size());
            agents_.push_back(agent);
        }
        classes_.push_back(std::move(cs));
    }
}

void Population::fund_all(Exchange& exchange) {
    for (const auto& agent : agents_) exchange.fund(agent.id, agent.wealth);
}

void Population::recapitalize(Exchange& exchange, int day) {
    for (auto& agent : agents_) {
        const double eq = exchange.equity(agent.id);
        if (eq < 0.1 * agent.wealth) {
            if (agent.busted_since < 0) agent.busted_since = day;
            if (day - agent.busted_since >= 5) {
                exchange.fund(agent.id, agent.wealth - eq); // entrant replaces the account
                agent.busted_since = -1;
            }
        } else {
            agent.busted_since = -1;
        }
    }
}

void Population::submit_all(std::vector<AgentOrder>& orders, Exchange& exchange) {
    for (const auto& order : orders) {
        const SubmitResult r = exchange.submit(order);
        if (!r.accepted) ++rejected_;
    }
}

std::vector<AgentOrder> Population::step_class(AgentClass cls, const MarketView& view,
                                               Exchange& exchange) {
    for (auto& cs : classes_) {
        if (cs.spec.cls != cls) continue;
        switch (cls) {
            case AgentClass::Informed: return step_informed(cs, view, exchange);
            case AgentClass::Uninformed: return step_uninformed(cs, view, exchange);
            case AgentClass::Hedger: return step_hedgers(cs, view, exchange);
            case AgentClass::Speculator: return step_speculators(cs, view, exchange);
            case AgentClass::Arbitrageur: return step_arbitrageurs(cs, view, exchange);
            case AgentClass::External: break;
        }
    }
    return {};
}

// Informed traders know the fundamental up to noise. On the book they act as
// makers, quoting both sides around their estimate; on pool/oracle venues
// they trade toward the estimate only when the market leaves their band.
std::vector<AgentOrder> Population::step_informed(ClassState& cs, const MarketView& view,
                                                  Exchange& exchange) {
    std::vector<AgentOrder> submitted;
    const TraderSpec& spec = cs.spec;
    for (const std::size_t idx : cs.members) {
        Agent& agent = agents_[idx];
        const bool act = cs.rng.bernoulli(spec.participation);
        const double estimate = view.fundamental * (1.0 + spec.signal_noise * cs.rng.normal());
        if (!act) continue;

        if (exchange.kind() == EngineKind::Lob) {
            auto& lob = static_cast<LobExchange&>(exchange);
            lob.cancel_owner_orders(agent.id);
            const double depth_scale =
                std::pow(std::clamp(view.oi_depth_ratio, 0.25, 4.0), spec.depth_oi_gain);
            const double qty = agent.wealth * spec.quote_fraction * depth_scale / estimate;
            AgentOrder bid;
            bid.owner = agent.id;
            bid.cls = AgentClass::Informed;
            bid.side = Side::Buy;
            bid.kind = OrderKind::Limit;
            bid.quantity = qty;
            bid.limit_price = estimate * (1.0 - spec.quote_half_spread);
            bid.leverage = agent.leverage;
            AgentOrder ask = bid;
            ask.side = Side::Sell;
            ask.limit_price = estimate * (1.0 + spec.quote_half_spread);
            submitted.push_back(bid);
            submitted.push_back(ask);
        } else {
            const double gap = (view.mark - estimate) / estimate;
            if (std::fabs(gap) <= spec.quote_half_spread) continue;
            AgentOrder order;
            order.owner = agent.id;
            order.cls = AgentClass::Informed;
            order.kind = OrderKind::Market;
            order.side = gap < 0 ? Side::Buy : Side::Sell; // trade toward the estimate
            const double strength = std::min(1.0, std::fabs(gap) / (4.0 * spec.quote_half_spread));
            order.notional = agent.wealth * spec.quote_fraction * strength;
            order.quantity = order.notional / view.mark;
            order.leverage = agent.leverage;
            submitted.push_back(order);
        }
    }
    submit_all(submitted, exchange);
    return submitted;
}

// Uninformed traders chase volatility: order flow scales with the trailing
// and running intraday volatility of the underlying, direction leans on
// yesterday's return, longs after good news are scaled by the overreaction
// multiplier, and de-grossing becomes more likely as volatility rises.
std::vector<AgentOrder> Population::step_uninformed(ClassState& cs, const MarketView& view,
                                                    Exchange& exchange) {
    std::vector<AgentOrder> submitted;
    const TraderSpec& spec = cs.spec;
    for (const std::size_t idx : cs.members) {
        Agent& agent = agents_[idx];
        const bool act = cs.rng.bernoulli(spec.participation);
        const double u_dir = cs.rng.uniform();
        const double u_close = cs.rng.uniform();

        // margin pressure: losses shrink equity until the position must be
        // cut back under its leverage cap, whether or not the agent "acts"
        const double pos = exchange.position(agent.id);
        if (pos != 0 && view.mark > 0) {
            const double equity = std::max(0.0, exchange.equity(agent.id));
            const double pos_notional = std::fabs(pos) * view.mark;
            const double cap = agent.leverage * equity;
            if (pos_notional > 0.85 * cap) {
                AgentOrder trim;
                trim.owner = agent.id;
                trim.cls = AgentClass::Uninformed;
                trim.kind = OrderKind::Market;
                trim.reduce_only = true;
                trim.side = pos > 0 ? Side::Sell : Side::Buy;
                trim.notional = pos_notional - 0.6 * cap;
                trim.quantity = trim.notional / view.mark;
                submitted.push_back(trim);
                continue;
            }
        }
        if (!act) continue;

        // fast signal: short trail and the range forming today; slow signal:
        // the volatility regime. Sizing is multiplicative in both.
        const double fast_vol =
            std::max(view.trailing_vol, 0.5 * view.trailing_vol + view.intraday_range_vol);
        const double fast_ratio = std::clamp(fast_vol / view.reference_vol, 0.25, 4.0);
        const double regime_ratio =
            view.trailing_vol_long > 0
                ? std::clamp(view.trailing_vol_long / view.reference_vol, 0.5, 2.0)
                : 1.0;
        const double vol_ratio = fast_ratio * regime_ratio;

        const double close_p =
            std::clamp(spec.close_prob + spec.close_vol_sensitivity * (vol_ratio - 1.0), 0.02, 0.9);
        if (u_close < close_p) {
            const double pos = exchange.position(agent.id);
            if (pos == 0) continue;
            AgentOrder close;
            close.owner = agent.id;
            close.cls = AgentClass::Uninformed;
            close.kind = OrderKind::Market;
            close.reduce_only = true;
            close.side = pos > 0 ? Side::Sell : Side::Buy;
            // sized like any other uninformed order; the engine clamps
            // reduce-only fills to the open position
            close.notional = agent.wealth * spec.size_fraction * vol_ratio;
            close.quantity = view.mark > 0 ? close.notional / view.mark : 0;
            if (close.notional > 0) submitted.push_back(close);
            continue;
        }

        const double tilt =
            std::clamp(spec.momentum_tilt * view.last_day_return, -0.35, 0.35);
        const Side side = u_dir < 0.5 + tilt ? Side::Buy : Side::Sell;

        AgentOrder order;
        order.owner = agent.id;
        order.cls = AgentClass::Uninformed;
        order.kind = OrderKind::Market;
        order.side = side;
        double notional = agent.wealth * spec.size_fraction * vol_ratio;
        if (side == Side::Buy && view.last_day_return > 0) notional *= spec.overreaction;
        order.notional = notional;
        order.quantity = view.mark > 0 ? notional / view.mark : 0;
        order.leverage = agent.leverage;
        submitted.push_back(order);
    }
    submit_all(submitted, exchange);
    return submitted;
}

// Hedgers rebalance toward a fixed short-notional target on their own
// period; slow, predictable flow.
std::vector<AgentOrder> Population::step_hedgers(ClassState& cs, const MarketView& view,
                                                 Exchange& exchange) {
    std::vector<AgentOrder> submitted;
    const TraderSpec& spec = cs.spec;
    if (view.step != 0) return submitted; // hedgers act at the day open
    for (const std::size_t idx : cs.members) {
        Agent& agent = agents_[idx];
        if (spec.rebalance_period < 1 ||
            (view.day % spec.rebalance_period) != agent.rebalance_offset % spec.rebalance_period)
            continue;
        const double jitter = 1.0 + 0.1 * cs.rng.normal();
        // hedging demand scales with the volatility regime
        const double regime = view.trailing_vol_long > 0
                                  ? std::clamp(view.trailing_vol_long / view.reference_vol, 0.5, 2.0)
                                  : 1.0;
        const double target_short =
            spec.hedge_fraction * agent.wealth * regime * std::max(0.2, jitter);

        AgentOrder order;
        order.owner = agent.id;
        order.cls = AgentClass::Hedger;
        order.kind = OrderKind::Market;
        order.side = Side::Sell;
        order.notional = target_short;
        order.quantity = view.mark > 0 ? target_short / view.mark : 0;
        order.leverage = agent.leverage;
        // roll the previous hedge first so the position tracks the target
        if (exchange.position(agent.id) != 0) {
            AgentOrder unwind = order;
            unwind.reduce_only = true;
            unwind.side = Side::Buy;
            unwind.notional = 0; // full unwind
            unwind.quantity = 0;
            submitted.push_back(unwind);
        }
        submitted.push_back(order);
    }
    submit_all(submitted, exchange);
    return submitted;
}

// Speculators produce seeded shocks: occasional large market orders.
std::vector<AgentOrder> Population::step_speculators(ClassState& cs, const MarketView& view,
                                                     Exchange& exchange) {
    std::vector<AgentOrder> submitted;
    const TraderSpec& spec = cs.spec;
    for (const std::size_t idx : cs.members) {
        Agent& agent = agents_[idx];
        const int shocks =
            cs.rng.poisson(spec.shock_intensity_per_day / std::max(1, view.steps_per_day));
        for (int j = 0; j < shocks; ++j) {
            AgentOrder order;
            order.owner = agent.id;
            order.cls = AgentClass::Speculator;
            order.kind = OrderKind::Market;
            order.side = cs.rng.bernoulli(0.5) ? Side::Buy : Side::Sell;
            order.notional = agent.wealth * spec.shock_size * cs.rng.lognormal(0.0, 0.6);
            order.quantity = view.mark > 0 ? order.notional / view.mark : 0;
            order.leverage = agent.leverage;
            submitted.push_back(order);
        }
    }
    submit_all(submitted, exchange);
    return submitted;
}

// Arbitrageurs close pool-vs-spot gaps beyond the configured threshold,
// trading the pool back to the edge of the no-arbitrage band.
std::vector<AgentOrder> Population::step_arbitrageurs(ClassState& cs, const MarketView& view,
                                                      Exchange& exchange) {
    std::vector<AgentOrder> submitted;
    if (exchange.kind() != EngineKind::Vamm) return submitted;
    auto& vamm = static_cast<VammExchange&>(exchange);
    const TraderSpec& spec = cs.spec;
    for (const std::size_t idx : cs.members) {
        Agent& agent = agents_[idx];
        const double pool_price = exchange.mark_price();
        const double gap = (pool_price - view.fundamental) / view.fundamental;
        const double pos = exchange.position(agent.id);

        if (std::fabs(gap) <= spec.arb_threshold) {
            // inside the band: recycle capital, but never by enough to push
            // the pool out through the far edge
            if (pos == 0) continue;
            const double toward_edge = pos > 0
                                           ? view.fundamental * (1.0 - spec.arb_threshold)
                                           : view.fundamental * (1.0 + spec.arb_threshold);
            const double room = std::fabs(vamm.quote_needed_to_price(toward_edge));
            const double unwindable = std::min(room, std::fabs(pos) * pool_price);
            if (unwindable <= 0) continue;
            AgentOrder flat;
            flat.owner = agent.id;
            flat.cls = AgentClass::Arbitrageur;
            flat.kind = OrderKind::Market;
            flat.reduce_only = true;
            flat.side = pos > 0 ? Side::Sell : Side::Buy;
            flat.notional = unwindable;
            flat.quantity = unwindable / pool_price;
            submitted.push_back(flat);
            if (!exchange.submit(flat).accepted) ++rejected_;
            continue;
        }

        const double edge = view.fundamental *
                            (gap > 0 ? 1.0 + spec.arb_threshold : 1.0 - spec.arb_threshold);
        const double needed = vamm.quote_needed_to_price(edge);
        if (needed == 0) continue;

        AgentOrder order;
        order.owner = agent.id;
        order.cls = AgentClass::Arbitrageur;
        order.kind = OrderKind::Market;
        order.side = needed > 0 ? Side::Buy : Side::Sell;
        order.notional = std::fabs(needed);
        order.quantity = order.notional / pool_price;
        order.leverage = agent.leverage;

        // unwind opposite exposure first; it moves the pool the same way
        if ((needed > 0 && pos < 0) || (needed < 0 && pos > 0)) {
            AgentOrder unwind = order;
            unwind.reduce_only = true;
            const double pos_notional = std::fabs(pos) * pool_price;
            unwind.notional = std::min(order.notional, pos_notional);
            unwind.quantity = unwind.notional / pool_price;
            submitted.push_back(unwind);
            if (!exchange.submit(unwind).accepted) ++rejected_;
            if (pos_notional >= order.notional) continue;
            order.notional -= unwind.notional;
            order.quantity = order.notional / pool_price;
        }
        submitted.push_back(order);
        if (!exchange.submit(order).accepted) ++rejected_;
    }
    return submitted;
}

std::vector<TraderSpec> default_population() {
    std::vector<TraderSpec> specs;

    TraderSpec informed;
    informed.cls = AgentClass::Informed;
    informed.count = 50;
    informed.wealth_median = 2e6;
    informed.wealth_log_sd = 0.5;
    informed.leverage_min = 1.5;
    informed.leverage_max = 3.0;
    informed.participation = 0.25;
    informed.signal_noise = 0.002;
    informed.quote_half_spread = 0.0015;
    informed.quote_fraction = 0.02;
    specs.push_back(informed);

    TraderSpec uninformed;
    uninformed.cls = AgentClass::Uninformed;
    uninformed.count = 250;
    uninformed.wealth_median = 5e4;
    uninformed.wealth_log_sd = 0.8;
    uninformed.leverage_min = 3.0;
    uninformed.leverage_max = 9.0;
    uninformed.participation = 0.05;
    uninformed.size_fraction = 0.10;
    uninformed.overreaction = 1.5;
    uninformed.momentum_tilt = 5.0;
    uninformed.close_prob = 0.10;
    uninformed.close_vol_sensitivity = 0.6;
    specs.push_back(uninformed);

    TraderSpec hedger;
    hedger.cls = AgentClass::Hedger;
    hedger.count = 20;
    hedger.wealth_median = 1e6;
    hedger.wealth_log_sd = 0.4;
    hedger.leverage_min = 1.0;
    hedger.leverage_max = 2.0;
    hedger.rebalance_period = 20;
    hedger.hedge_fraction = 0.4;
    specs.push_back(hedger);

    TraderSpec speculator;
    speculator.cls = AgentClass::Speculator;
    speculator.count = 30;
    speculator.wealth_median = 2e5;
    speculator.wealth_log_sd = 0.6;
    speculator.leverage_min = 5.0;
    speculator.leverage_max = 10.0;
    speculator.shock_intensity_per_day = 0.3;
    speculator.shock_size = 1.5;
    specs.push_back(speculator);

    TraderSpec arb;
    arb.cls = AgentClass::Arbitrageur;
    arb.count = 2;
    arb.wealth_median = 2e8;
    arb.wealth_log_sd = 0.1;
    arb.leverage_min = 1.5;
    arb.leverage_max = 2.0;
    arb.arb_threshold = 0.005;
    specs.push_back(arb);

    return specs;
}

} // namespace perpsim
