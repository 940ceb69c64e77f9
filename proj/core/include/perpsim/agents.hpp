#pragma once

#include "perpsim/dates.hpp"
#include "perpsim/exchange.hpp"
#include "perpsim/marketdata.hpp"
#include "perpsim/rng.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace perpsim {

/// Exogenous underlying price process (stand-in for the spot market).
/// Same seed, same path. The optional log-volatility AR(1) multiplier adds
/// volatility clustering; with vol_persistence = 0 the process is plain GBM.
struct PriceProcess {
    enum class Kind { GeometricBrownian, JumpDiffusion };
    Kind kind = Kind::GeometricBrownian;
    double drift_per_year = 0.0;
    double vol_per_sqrt_year = 0.6;
    double jump_intensity_per_year = 12.0; // jump-diffusion only
    double jump_log_sd = 0.03;             // jump-diffusion only
    double vol_persistence = 0.0;          // rho of the daily log-vol AR(1)
    double vol_of_vol = 0.0;               // innovation sd of the log-vol AR(1)
    int steps_per_day = 24;
    double initial_price = 30000.0;
    std::uint64_t seed = 1;
};

PriceProcess::Kind price_process_kind_from_string(const std::string& s);

struct PricePath {
    double initial_price = 0;
    int steps_per_day = 1;
    Date start_date;
    std::vector<double> step_prices; // days * steps_per_day entries

    int days() const { return static_cast<int>(step_prices.size()) / steps_per_day; }
    double step(int day, int step_in_day) const {
        return step_prices[static_cast<std::size_t>(day * steps_per_day + step_in_day)];
    }
    /// Price carried into a day's open (initial price for day 0).
    double day_open(int day) const {
        return day == 0 ? initial_price
                        : step_prices[static_cast<std::size_t>(day * steps_per_day) - 1];
    }
    std::vector<Candle> daily_candles() const;
};

PricePath generate_price_path(const PriceProcess& process, Date start, int days);

/// Daily OHLC candles of the process (intraday steps aggregated).
std::vector<Candle> generate_path(const PriceProcess& process, Date start, int days);

/// One trader class of the population.
struct TraderSpec {
    AgentClass cls = AgentClass::Uninformed;
    int count = 0;
    double wealth_median = 1e5;
    double wealth_log_sd = 0.5;
    double leverage_min = 2;
    double leverage_max = 8;
    double participation = 0.05; // per-step action probability

    // informed: noisy fundamental observation, maker quotes inside a band
    double signal_noise = 0.002;
    double quote_half_spread = 0.0015;
    double quote_fraction = 0.02; // per-side quote size as a fraction of wealth
    // quoted depth scales with open interest (capital inflow deepens the book)
    double depth_oi_gain = 2.0;

    // uninformed: volatility-chasing sizing and positive-news overreaction
    double size_fraction = 0.10;
    double overreaction = 1.5; // long multiplier after a positive day
    double momentum_tilt = 5.0;
    double close_prob = 0.10;         // base chance an action is a close
    double close_vol_sensitivity = 0.6; // extra close probability per vol ratio

    // hedger
    int rebalance_period = 20;
    double hedge_fraction = 0.4;

    // speculator
    double shock_intensity_per_day = 0.3;
    double shock_size = 1.5; // notional multiple of wealth

    // arbitrageur (VAMM): closes pool-vs-spot gaps beyond the threshold
    double arb_threshold = 0.005;
};

/// What agents see each step. trailing_vol and last_day_return come from the
/// underlying's completed candles (no look-ahead); intraday_range_vol is the
/// running ln(high/low) of the underlying today.
struct MarketView {
    double mark = 0;
    double fundamental = 0;
    double last_day_return = 0;
    double trailing_vol = 0;      // short window (days)
    double trailing_vol_long = 0; // regime window; 0 until enough history
    double intraday_range_vol = 0;
    /// live open interest over its trailing mean (1 when no history yet)
    double oi_depth_ratio = 1.0;
    double reference_vol = 0.03; // scale for vol ratios
    int day = 0;
    int step = 0;
    int steps_per_day = 24;
};

/// Seeded trader population. Each class draws from its own random stream, so
/// adding or resizing one class never perturbs another class's draws.
class Population {
public:
    Population(std::vector<TraderSpec> specs, const Rng& root);

    /// Deposits every agent's starting wealth with the exchange.
    void fund_all(Exchange& exchange);

    /// Runs one class for one step: generates orders, submits them, returns
    /// what was submitted (rejections are engine-recorded, not resubmitted).
    std::vector<AgentOrder> step_class(AgentClass cls, const MarketView& view,
                                       Exchange& exchange);

    /// Re-capitalizes agents whose equity fell below 10% of starting wealth
    /// (entrant churn keeps activity stationary). Called once per day.
    void recapitalize(Exchange& exchange, int day);

    std::size_t rejected_orders() const { return rejected_; }

private:
    struct Agent {
        std::string id;
        AgentClass cls = AgentClass::Uninformed;
        double wealth = 0;
        double leverage = 1;
        int rebalance_offset = 0;
        int busted_since = -1;
    };

    struct ClassState {
        TraderSpec spec;
        Rng rng{0};
        std::vector<std::size_t> members; // indices into agents_
    };

    std::vector<AgentOrder> step_informed(ClassState& cs, const MarketView& view,
                                          Exchange& exchange);
    std::vector<AgentOrder> step_uninformed(ClassState& cs, const MarketView& view,
                                            Exchange& exchange);
    std::vector<AgentOrder> step_hedgers(ClassState& cs, const MarketView& view,
                                         Exchange& exchange);
    std::vector<AgentOrder> step_speculators(ClassState& cs, const MarketView& view,
                                             Exchange& exchange);
    std::vector<AgentOrder> step_arbitrageurs(ClassState& cs, const MarketView& view,
                                              Exchange& exchange);
    void submit_all(std::vector<AgentOrder>& orders, Exchange& exchange);

    std::vector<Agent> agents_;
    std::vector<ClassState> classes_;
    std::size_t rejected_ = 0;
};

std::vector<TraderSpec> default_population();

} // namespace perpsim
