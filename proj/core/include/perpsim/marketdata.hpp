#pragma once

#include "perpsim/dates.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace perpsim {

/// One day's OHLC prices of the underlying, USD per unit. All four prices
/// must be strictly positive and satisfy low <= min(open, close),
/// high >= max(open, close).
struct Candle {
    Date date;
    double open = 0;
    double high = 0;
    double low = 0;
    double close = 0;
};

/// Throws DataError when the OHLC invariants are violated; `context` is
/// prepended to the message (row number, date, ...).
void validate_candle(const Candle& c, const std::string& context = {});

/// Log-form daily return: ln(close) - ln(open).
double log_return(const Candle& c);

enum class SourceTag { LobCex, Vamm, Oracle, Simulated };

SourceTag source_tag_from_string(const std::string& s);
std::string to_string(SourceTag tag);

/// Per-day trading aggregates. USD fields are finite and non-negative;
/// leverage fields are dimensionless multiples, both present or both absent.
struct ActivityRecord {
    Date date;
    double volume = 0;
    double oi_long = 0;
    double oi_short = 0;
    double liq_long = 0;
    double liq_short = 0;
    std::optional<double> lev_long;
    std::optional<double> lev_short;
    bool imputed = false; // true for forward-filled gap days
};

/// Gap-free, date-sorted run of daily activity records.
struct ActivitySeries {
    SourceTag source = SourceTag::Simulated;
    std::vector<ActivityRecord> records;

    bool has_leverage() const;
    std::vector<Date> dates() const;
    /// Values of one named column: volume | oi_long | oi_short | liq_long |
    /// liq_short | lev_long | lev_short.
    std::vector<double> column(const std::string& name) const;
};

/// Names of the activity columns present in a series, in schema order.
std::vector<std::string> activity_column_names(const ActivitySeries& series);

enum class GapPolicy {
    Reject,      // any missing day is an error (default)
    ForwardFill, // missing days copied from the previous day, marked imputed
};

/// Parses `date,open,high,low,close` CSV text. Result is date-sorted;
/// duplicate dates and OHLC-inconsistent rows are errors.
std::vector<Candle> parse_candles(std::string_view csv_text);

/// Parses `date,volume,oi_long,oi_short,liq_long,liq_short[,lev_long,lev_short]`.
/// CEX-origin rows must satisfy oi_long = oi_short within 1e-6 relative.
ActivitySeries parse_activity(std::string_view csv_text, SourceTag source,
                              GapPolicy gaps = GapPolicy::Reject);

std::string serialize_candles(std::span<const Candle> candles);
std::string serialize_activity(const ActivitySeries& series);

} // namespace perpsim
