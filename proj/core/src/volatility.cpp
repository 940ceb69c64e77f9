#include "perpsim/volatility.hpp"

#include "perpsim/csvio.hpp"
#include "perpsim/errors.hpp"

#include <cmath>
#include <sstream>

namespace perpsim {

VolatilityPoint garman_klass(const Candle& c, RadicandPolicy policy) {
    // Positivity and low <= high are required for the logs; open/close may sit
    // outside [low, high] in dirty feed data, which is exactly when the
    // radicand can go negative and the policy applies. (For fully consistent
    // candles the radicand is provably >= 0: |ln(O/C)| <= ln(H/L) and the
    // coefficient 2 ln 2 - 1 is below 0.5.)
    if (!(c.open > 0 && c.high > 0 && c.low > 0 && c.close > 0) ||
        !std::isfinite(c.open + c.high + c.low + c.close))
        throw DataError(c.date.to_string() + ": candle prices must be finite and > 0");
    if (c.low > c.high) throw DataError(c.date.to_string() + ": candle has low > high");
    const double hl = std::log(c.high / c.low);
    const double oc = std::log(c.open / c.close);
    const double radicand = 0.5 * hl * hl - (2.0 * std::log(2.0) - 1.0) * oc * oc;
    if (radicand < 0.0) {
        if (policy == RadicandPolicy::Error)
            throw NumericError("degenerate candle on " + c.date.to_string() +
                               ": negative radicand " + format_double(radicand));
        return {c.date, 0.0};
    }
    return {c.date, std::sqrt(radicand)};
}

std::vector<VolatilityPoint> volatility_series(std::span<const Candle> candles,
                                               RadicandPolicy policy) {
    std::vector<VolatilityPoint> out;
    out.reserve(candles.size());
    for (const auto& c : candles) out.push_back(garman_klass(c, policy));
    return out;
}

std::string serialize_volatility(std::span<const VolatilityPoint> points) {
    std::ostringstream ss;
    ss << "date,sigma\n";
    for (const auto& p : points) ss << p.date.to_string() << ',' << format_double(p.sigma) << '\n';
    return ss.str();
}

} // namespace perpsim
