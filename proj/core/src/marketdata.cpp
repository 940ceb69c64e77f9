#include "perpsim/marketdata.hpp"

#include "perpsim/csvio.hpp"
#include "perpsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace perpsim {
namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

std::string row_context(std::size_t row) { return "row " + std::to_string(row) + ": "; }

void check_header(const std::vector<std::string>& got, const std::vector<std::string>& want,
                  const std::string& what) {
    if (got != want) {
        std::ostringstream ss;
        ss << what << " header mismatch, expected '";
        for (std::size_t i = 0; i < want.size(); ++i) ss << (i ? "," : "") << want[i];
        ss << "'";
        throw DataError(ss.str());
    }
}

} // namespace

void validate_candle(const Candle& c, const std::string& context) {
    if (!(c.open > 0 && c.high > 0 && c.low > 0 && c.close > 0) ||
        !std::isfinite(c.open + c.high + c.low + c.close))
        throw DataError(context + "candle prices must be finite and > 0");
    if (c.low > c.high)
        throw DataError(context + "OHLC inconsistency: low > high");
    if (c.low > std::min(c.open, c.close) || c.high < std::max(c.open, c.close))
        throw DataError(context + "OHLC inconsistency: open/close outside [low, high]");
}

double log_return(const Candle& c) { return std::log(c.close) - std::log(c.open); }

SourceTag source_tag_from_string(const std::string& s) {
    if (s == "lob-cex" || s == "cex") return SourceTag::LobCex;
    if (s == "vamm") return SourceTag::Vamm;
    if (s == "oracle") return SourceTag::Oracle;
    if (s == "simulated") return SourceTag::Simulated;
    throw DataError("unknown source tag '" + s + "' (expected lob-cex|vamm|oracle|simulated)");
}

std::string to_string(SourceTag tag) {
    switch (tag) {
        case SourceTag::LobCex: return "lob-cex";
        case SourceTag::Vamm: return "vamm";
        case SourceTag::Oracle: return "oracle";
        case SourceTag::Simulated: return "simulated";
    }
    return "?";
}

bool ActivitySeries::has_leverage() const {
    return !records.empty() && records.front().lev_long.has_value();
}

std::vector<Date> ActivitySeries::dates() const {
    std::vector<Date> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.date);
    return out;
}

std::vector<double> ActivitySeries::column(const std::string& name) const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (name == "volume") out.push_back(r.volume);
        else if (name == "oi_long") out.push_back(r.oi_long);
        else if (name == "oi_short") out.push_back(r.oi_short);
        else if (name == "liq_long") out.push_back(r.liq_long);
        else if (name == "liq_short") out.push_back(r.liq_short);
        else if (name == "lev_long" || name == "lev_short") {
            const auto& v = (name == "lev_long") ? r.lev_long : r.lev_short;
            if (!v) throw DataError("series has no leverage columns");
            out.push_back(*v);
        } else {
            throw DataError("unknown activity column '" + name + "'");
        }
    }
    return out;
}

std::vector<std::string> activity_column_names(const ActivitySeries& series) {
    std::vector<std::string> names = {"volume", "oi_long", "oi_short", "liq_long", "liq_short"};
    if (series.has_leverage()) {
        names.push_back("lev_long");
        names.push_back("lev_short");
    }
    return names;
}

std::vector<Candle> parse_candles(std::string_view csv_text) {
    const auto lines = split_lines(csv_text);
    if (lines.empty()) throw DataError("candles CSV is empty (missing header)");
    check_header(split_csv_line(lines[0]), {"date", "open", "high", "low", "close"}, "candles");

    std::vector<Candle> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != 5)
            throw DataError(row_context(i) + "expected 5 fields, got " +
                            std::to_string(fields.size()));
        Candle c;
        c.date = Date::from_string(fields[0]);
        c.open = parse_double_field(fields[1], "open");
        c.high = parse_double_field(fields[2], "high");
        c.low = parse_double_field(fields[3], "low");
        c.close = parse_double_field(fields[4], "close");
        validate_candle(c, row_context(i) + fields[0] + ": ");
        out.push_back(c);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Candle& a, const Candle& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i].date == out[i - 1].date)
            throw DataError("duplicate candle date " + out[i].date.to_string());
    return out;
}

ActivitySeries parse_activity(std::string_view csv_text, SourceTag source, GapPolicy gaps) {
    const auto lines = split_lines(csv_text);
    if (lines.empty()) throw DataError("activity CSV is empty (missing header)");

    const std::vector<std::string> base = {"date",     "volume",   "oi_long",
                                           "oi_short", "liq_long", "liq_short"};
    std::vector<std::string> with_lev = base;
    with_lev.push_back("lev_long");
    with_lev.push_back("lev_short");

    const auto header = split_csv_line(lines[0]);
    bool has_lev = false;
    if (header == with_lev) has_lev = true;
    else check_header(header, base, "activity");

    ActivitySeries series;
    series.source = source;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_csv_line(lines[i]);
        const std::size_t expected = has_lev ? 8 : 6;
        if (fields.size() != expected)
            throw DataError(row_context(i) + "expected " + std::to_string(expected) +
                            " fields, got " + std::to_string(fields.size()));
        ActivityRecord r;
        r.date = Date::from_string(fields[0]);
        r.volume = parse_double_field(fields[1], "volume");
        r.oi_long = parse_double_field(fields[2], "oi_long");
        r.oi_short = parse_double_field(fields[3], "oi_short");
        r.liq_long = parse_double_field(fields[4], "liq_long");
        r.liq_short = parse_double_field(fields[5], "liq_short");
        if (has_lev) {
            r.lev_long = parse_double_field(fields[6], "lev_long");
            r.lev_short = parse_double_field(fields[7], "lev_short");
        }
        const std::string ctx = row_context(i) + fields[0] + ": ";
        for (double v : {r.volume, r.oi_long, r.oi_short, r.liq_long, r.liq_short})
            if (!finite_nonneg(v)) throw DataError(ctx + "USD fields must be finite and >= 0");
        if (has_lev && (!finite_nonneg(*r.lev_long) || !finite_nonneg(*r.lev_short)))
            throw DataError(ctx + "leverage fields must be finite and >= 0");
        if (source == SourceTag::LobCex) {
            // every contract pairs a buyer and a seller, so long OI == short OI
            const double scale = std::max({r.oi_long, r.oi_short, 1.0});
            if (std::fabs(r.oi_long - r.oi_short) > 1e-6 * scale)
                throw DataError(ctx + "CEX open-interest mismatch: oi_long=" +
                                format_double(r.oi_long) + " oi_short=" +
                                format_double(r.oi_short));
        }
        series.records.push_back(r);
    }

    auto& recs = series.records;
    std::stable_sort(recs.begin(), recs.end(),
                     [](const ActivityRecord& a, const ActivityRecord& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < recs.size(); ++i) {
        if (recs[i].date == recs[i - 1].date)
            throw DataError("duplicate activity date " + recs[i].date.to_string());
    }

    if (recs.size() > 1) {
        std::vector<ActivityRecord> filled;
        filled.reserve(recs.size());
        filled.push_back(recs.front());
        for (std::size_t i = 1; i < recs.size(); ++i) {
            std::int64_t gap = recs[i].date - recs[i - 1].date;
            if (gap > 1) {
                if (gaps == GapPolicy::Reject)
                    throw DataError("date gap: " + recs[i - 1].date.to_string() + " -> " +
                                    recs[i].date.to_string() +
                                    " (use forward-fill imputation to accept)");
                for (std::int64_t k = 1; k < gap; ++k) {
                    ActivityRecord ghost = filled.back();
                    ghost.date = recs[i - 1].date + k;
                    ghost.imputed = true;
                    filled.push_back(ghost);
                }
            }
            filled.push_back(recs[i]);
        }
        recs = std::move(filled);
    }
    return series;
}

std::string serialize_candles(std::span<const Candle> candles) {
    std::ostringstream ss;
    ss << "date,open,high,low,close\n";
    for (const auto& c : candles)
        ss << c.date.to_string() << ',' << format_double(c.open) << ',' << format_double(c.high)
           << ',' << format_double(c.low) << ',' << format_double(c.close) << '\n';
    return ss.str();
}

std::string serialize_activity(const ActivitySeries& series) {
    std::ostringstream ss;
    const bool lev = series.has_leverage();
    ss << "date,volume,oi_long,oi_short,liq_long,liq_short";
    if (lev) ss << ",lev_long,lev_short";
    ss << '\n';
    for (const auto& r : series.records) {
        ss << r.date.to_string() << ',' << format_double(r.volume) << ','
           << format_double(r.oi_long) << ',' << format_double(r.oi_short) << ','
           << format_double(r.liq_long) << ',' << format_double(r.liq_short);
        if (lev) ss << ',' << format_double(*r.lev_long) << ',' << format_double(*r.lev_short);
        ss << '\n';
    }
    return ss.str();
}

} // namespace perpsim
