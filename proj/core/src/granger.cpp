#include "perpsim/granger.hpp"

#include "perpsim/errors.hpp"
#include "perpsim/ols.hpp"
#include "perpsim/stats.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace perpsim {
namespace {

// lagged column: values[t - lag] for usable rows t = L..n-1
std::vector<double> lag_column(std::span<const double> v, int lag, int max_lag) {
    std::vector<double> out;
    out.reserve(v.size() - static_cast<std::size_t>(max_lag));
    for (std::size_t t = static_cast<std::size_t>(max_lag); t < v.size(); ++t)
        out.push_back(v[t - static_cast<std::size_t>(lag)]);
    return out;
}

} // namespace

GrangerResult granger_test(std::span<const double> x, std::span<const double> y, int max_lag,
                           const std::string& x_name, const std::string& y_name) {
    if (x.size() != y.size()) throw DataError("granger_test: series lengths differ");
    if (max_lag < 1) throw DataError("granger_test: max_lag must be >= 1");
    const std::size_t n_total = y.size();
    if (n_total <= static_cast<std::size_t>(3 * max_lag + 5))
        throw DataError("granger_test: series too short for max_lag " + std::to_string(max_lag));

    const std::size_t n = n_total - static_cast<std::size_t>(max_lag);
    std::vector<double> response(y.begin() + max_lag, y.end());

    std::vector<std::vector<double>> restricted;
    std::vector<std::string> restricted_names;
    restricted.emplace_back(n, 1.0);
    restricted_names.emplace_back("intercept");
    for (int l = 1; l <= max_lag; ++l) {
        restricted.push_back(lag_column(y, l, max_lag));
        restricted_names.push_back("y_lag" + std::to_string(l));
    }

    std::vector<std::vector<double>> unrestricted = restricted;
    std::vector<std::string> unrestricted_names = restricted_names;
    for (int l = 1; l <= max_lag; ++l) {
        unrestricted.push_back(lag_column(x, l, max_lag));
        unrestricted_names.push_back("x_lag" + std::to_string(l));
    }

    const auto fit_r = ols(restricted, response, restricted_names);
    const auto fit_u = ols(unrestricted, response, unrestricted_names);

    const double df2 = static_cast<double>(n) - 2.0 * max_lag - 1.0;
    const double num = std::max(0.0, fit_r.rss - fit_u.rss) / static_cast<double>(max_lag);
    const double den = fit_u.rss / df2;

    GrangerResult out;
    out.h0 = x_name + " does not Granger-cause " + y_name;
    out.max_lag = max_lag;
    out.n_obs = n;
    out.f_stat = den > 0 ? num / den : 0.0;
    out.p_value = f_upper_tail(out.f_stat, static_cast<double>(max_lag), df2);
    return out;
}

std::vector<GrangerResult> granger_both_directions(std::span<const double> x,
                                                   std::span<const double> y, int max_lag,
                                                   const std::string& x_name,
                                                   const std::string& y_name) {
    return {granger_test(x, y, max_lag, x_name, y_name),
            granger_test(y, x, max_lag, y_name, x_name)};
}

std::string render_granger_table(std::span<const GrangerResult> rows) {
    std::size_t h0_width = 2;
    for (const auto& r : rows) h0_width = std::max(h0_width, r.h0.size());

    std::ostringstream ss;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-*s  %7s  %12s  %8s\n", static_cast<int>(h0_width), "H0",
                  "Max-lag", "F-statistics", "p-value");
    ss << buf;
    ss << std::string(h0_width + 2 + 7 + 2 + 12 + 2 + 8, '-') << '\n';
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-*s  %7d  %12.3f  %8.3f\n", static_cast<int>(h0_width),
                      r.h0.c_str(), r.max_lag, r.f_stat, r.p_value);
        ss << buf;
    }
    return ss.str();
}

} // namespace perpsim
