#include "perpsim/exchange.hpp"

#include "perpsim/csvio.hpp"
#include "perpsim/errors.hpp"

#include <algorithm>
#include <sstream>

namespace perpsim {

EngineKind engine_kind_from_string(const std::string& s) {
    if (s == "lob") return EngineKind::Lob;
    if (s == "oracle") return EngineKind::Oracle;
    if (s == "vamm") return EngineKind::Vamm;
    throw DataError("unknown engine '" + s + "' (expected lob|oracle|vamm)");
}

std::string to_string(EngineKind kind) {
    switch (kind) {
        case EngineKind::Lob: return "lob";
        case EngineKind::Oracle: return "oracle";
        case EngineKind::Vamm: return "vamm";
    }
    return "?";
}

const char* to_string(AgentClass cls) {
    switch (cls) {
        case AgentClass::Informed: return "informed";
        case AgentClass::Uninformed: return "uninformed";
        case AgentClass::Hedger: return "hedger";
        case AgentClass::Speculator: return "speculator";
        case AgentClass::Arbitrageur: return "arbitrageur";
        case AgentClass::External: return "external";
    }
    return "?";
}

std::string serialize_fill_log(std::span<const FillRecord> fills) {
    std::ostringstream ss;
    ss << "step,order_id,side,price,qty,liquidation_flag\n";
    for (const auto& f : fills)
        ss << f.step << ',' << f.order_id << ',' << (f.side == Side::Buy ? "buy" : "sell") << ','
           << format_double(f.price) << ',' << format_double(f.qty) << ','
           << (f.liquidation ? 1 : 0) << '\n';
    return ss.str();
}

std::string serialize_order_log(std::span<const FillRecord> fills) {
    std::ostringstream ss;
    ss << "step,order_id,owner,class,side,notional\n";
    for (const auto& f : fills)
        ss << f.step << ',' << f.order_id << ',' << f.owner << ',' << to_string(f.cls) << ','
           << (f.side == Side::Buy ? "buy" : "sell") << ',' << format_double(f.price * f.qty)
           << '\n';
    return ss.str();
}

void DayAccumulator::record_open(PositionSide side, double notional, double leverage) {
    if (side == PositionSide::Long) {
        lev_notional_long += notional;
        lev_weighted_long += notional * leverage;
    } else {
        lev_notional_short += notional;
        lev_weighted_short += notional * leverage;
    }
}

void DayAccumulator::record_liquidation(PositionSide side, double notional) {
    if (side == PositionSide::Long) liq_long += notional;
    else liq_short += notional;
}

double DayAccumulator::avg_leverage(PositionSide side) const {
    const double notional = side == PositionSide::Long ? lev_notional_long : lev_notional_short;
    const double weighted = side == PositionSide::Long ? lev_weighted_long : lev_weighted_short;
    return notional > 0 ? weighted / notional : 0.0;
}

void DayAccumulator::reset() { *this = DayAccumulator{}; }

void CandleBuilder::start(Date date, double carry_price) {
    candle = Candle{date, carry_price, carry_price, carry_price, carry_price};
    open_set = carry_price > 0;
}

void CandleBuilder::push(double price) {
    if (!(price > 0)) return;
    if (!open_set) {
        candle.open = candle.high = candle.low = candle.close = price;
        open_set = true;
        return;
    }
    candle.high = std::max(candle.high, price);
    candle.low = std::min(candle.low, price);
    candle.close = price;
}

} // namespace perpsim
