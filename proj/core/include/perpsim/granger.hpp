#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace perpsim {

/// One direction of a Granger-causality F test.
struct GrangerResult {
    std::string h0;     // "<x> does not Granger-cause <y>"
    int max_lag = 0;
    double f_stat = 0;  // >= 0
    double p_value = 1; // in [0, 1]
    std::size_t n_obs = 0;
};

/// Tests H0: x does not Granger-cause y. The restricted model regresses y on
/// its own lags 1..L; the unrestricted model adds x's lags 1..L;
///   F = ((RSS_r - RSS_u)/L) / (RSS_u/(n - 2L - 1)).
/// Requires equal-length series with length > 3*max_lag + 5.
GrangerResult granger_test(std::span<const double> x, std::span<const double> y, int max_lag,
                           const std::string& x_name = "x", const std::string& y_name = "y");

/// Both directions, shaped like a two-row causality table.
std::vector<GrangerResult> granger_both_directions(std::span<const double> x,
                                                   std::span<const double> y, int max_lag,
                                                   const std::string& x_name,
                                                   const std::string& y_name);

/// Text table with H0, Max-lag, F-statistics and p-value columns.
std::string render_granger_table(std::span<const GrangerResult> rows);

} // namespace perpsim
