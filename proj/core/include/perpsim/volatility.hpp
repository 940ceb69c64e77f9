#pragma once

#include "perpsim/marketdata.hpp"

#include <span>
#include <string>
#include <vector>

namespace perpsim {

/// Daily extreme-value volatility estimate. sigma is dimensionless and >= 0;
/// it is 0 exactly when the radicand is 0 (degenerate candle).
struct VolatilityPoint {
    Date date;
    double sigma = 0;
};

enum class RadicandPolicy {
    Error,       // negative radicand raises NumericError (default)
    ClampToZero, // negative radicand clamps sigma to 0 (batch robustness)
};

/// Extreme-value estimator from OHLC prices:
///   sigma = sqrt(0.5*ln(H/L)^2 - (2 ln 2 - 1)*ln(O/C)^2).
/// Depends only on price ratios, so it is scale invariant. The constant
/// (2 ln 2 - 1) is computed, not hard-coded.
VolatilityPoint garman_klass(const Candle& c, RadicandPolicy policy = RadicandPolicy::Error);

std::vector<VolatilityPoint> volatility_series(std::span<const Candle> candles,
                                               RadicandPolicy policy = RadicandPolicy::Error);

/// `date,sigma` CSV.
std::string serialize_volatility(std::span<const VolatilityPoint> points);

} // namespace perpsim
