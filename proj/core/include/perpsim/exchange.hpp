#pragma once

#include "perpsim/dates.hpp"
#include "perpsim/margin.hpp"
#include "perpsim/marketdata.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace perpsim {

enum class EngineKind { Lob, Oracle, Vamm };

EngineKind engine_kind_from_string(const std::string& s);
std::string to_string(EngineKind kind);

enum class AgentClass { Informed, Uninformed, Hedger, Speculator, Arbitrageur, External };

const char* to_string(AgentClass cls);

enum class Side { Buy, Sell };
enum class OrderKind { Limit, Market };

/// Engine-agnostic order intent. The LOB engine trades `quantity` base units
/// at `limit_price` (or by market); the VAMM and Oracle engines size by
/// `notional` USD. `reduce_only` closes existing exposure.
struct AgentOrder {
    std::string owner;
    AgentClass cls = AgentClass::External;
    Side side = Side::Buy;
    OrderKind kind = OrderKind::Market;
    double quantity = 0;    // base units (LOB)
    double notional = 0;    // USD (VAMM / Oracle)
    double limit_price = 0; // limit orders only
    double leverage = 1;
    bool reduce_only = false;
};

struct SubmitResult {
    bool accepted = false;
    std::string reason;       // set when rejected
    std::uint64_t order_id = 0;
    double filled_qty = 0;    // base units
    double filled_notional = 0;
};

/// One executed fill, attributed to the aggressing order.
struct FillRecord {
    std::uint64_t step = 0;
    std::uint64_t order_id = 0;
    Side side = Side::Buy;
    double price = 0;
    double qty = 0;
    bool liquidation = false;
    AgentClass cls = AgentClass::External;
    std::string owner;
    bool self_match = false;
};

/// Pinned fill-log schema: step,order_id,side,price,qty,liquidation_flag.
std::string serialize_fill_log(std::span<const FillRecord> fills);

/// Order attribution log: step,order_id,owner,class,side,notional.
std::string serialize_order_log(std::span<const FillRecord> fills);

/// Per-day aggregation shared by the engines.
struct DayAccumulator {
    double volume = 0;
    double liq_long = 0;
    double liq_short = 0;
    double lev_notional_long = 0; // opened-today notional, long side
    double lev_weighted_long = 0; // sum of notional * leverage
    double lev_notional_short = 0;
    double lev_weighted_short = 0;

    void record_open(PositionSide side, double notional, double leverage);
    void record_liquidation(PositionSide side, double notional);
    double avg_leverage(PositionSide side) const; // 0 when nothing opened
    void reset();
};

/// Single-writer simulated exchange consuming an ordered order stream.
/// begin_day / submit* / end_step* / end_day drive one simulated day.
class Exchange {
public:
    virtual ~Exchange() = default;

    virtual EngineKind kind() const = 0;
    virtual double mark_price() const = 0;

    virtual void fund(const std::string& owner, double collateral) = 0;
    virtual double equity(const std::string& owner) const = 0;
    /// Signed base position of one account (0 for unknown owners).
    virtual double position(const std::string& owner) const = 0;

    virtual SubmitResult submit(const AgentOrder& order) = 0;

    virtual void begin_day(Date date) = 0;
    /// Risk sweep after matching; returns this step's liquidation events.
    virtual std::vector<LiquidationEvent> risk_step(std::uint64_t step) = 0;
    /// Records the step close price for the daily candle.
    virtual void close_step(std::uint64_t step) = 0;
    virtual ActivityRecord end_day() = 0;

    virtual Candle day_candle() const = 0;

    virtual double oi_long() const = 0;
    virtual double oi_short() const = 0;

    const std::vector<FillRecord>& fill_log() const { return fills_; }
    void set_keep_fill_log(bool keep) { keep_fill_log_ = keep; }

protected:
    void record_fill(const FillRecord& fill) {
        if (keep_fill_log_) fills_.push_back(fill);
    }
    std::vector<FillRecord> fills_;
    bool keep_fill_log_ = true;
};

/// Running OHLC over the step prices of one day.
struct CandleBuilder {
    bool open_set = false;
    Candle candle;

    void start(Date date, double carry_price);
    void push(double price);
    Candle finish() const { return candle; }
};

} // namespace perpsim
