#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace perpsim {

/// ARIMA(p, d, q) order. All fits carry a constant (mean/drift) term, so the
/// degenerate (0, d, 0) order is a drift-only model.
struct ArimaOrder {
    int p = 0;
    int d = 0;
    int q = 0;

    bool operator==(const ArimaOrder&) const = default;
    std::string to_string() const;
};

/// Result of a conditional-sum-of-squares fit. `fitted` and `residuals` are
/// on the original (undifferenced) scale and satisfy
/// fitted[t] + residuals[t] == observed[t] for every t; the first d + p
/// points cannot be predicted by the recursion and are flagged `warmup`
/// (fitted = observed there).
struct ArimaFit {
    ArimaOrder order;
    double mean = 0; // constant term on the differenced scale
    std::vector<double> ar;
    std::vector<double> ma;
    double sigma2 = 0; // innovation variance, RSS / n_effective
    double rss = 0;    // conditional sum of squares on the differenced scale
    double aic = 0;    // n_eff * ln(RSS/n_eff) + 2 * (p + q + 1)
    std::size_t n_effective = 0;
    bool converged = false;
    bool stationary = false; // AR roots outside the unit circle
    bool invertible = false; // MA roots outside the unit circle

    std::vector<double> fitted;
    std::vector<double> residuals;
    std::vector<bool> warmup;
};

struct ArimaGrid {
    int max_p = 5;
    int max_d = 1;
    int max_q = 5;
};

/// Conditional-sum-of-squares fit with zero-initialized pre-sample
/// innovations, optimized by a deterministic Nelder-Mead search.
/// Requires series length >= 10 * (p + q + 1) after differencing.
ArimaFit fit_arima(std::span<const double> series, ArimaOrder order);

/// Minimum-AIC order among converged, stationary fits over the grid.
/// Ties break to the lexicographically smallest (d, p+q, p).
ArimaOrder select_order(std::span<const double> series, ArimaGrid grid = {});

/// An activity series split into ARIMA fitted values (expected) and
/// residuals (unexpected); expected + unexpected reconstructs the input.
struct DecomposedSeries {
    std::string name;
    ArimaOrder order;
    std::vector<double> expected;
    std::vector<double> unexpected;
    std::vector<bool> warmup;
};

DecomposedSeries decompose(std::span<const double> series, const std::string& name,
                           ArimaGrid grid = {});

/// Spectral radius of the companion matrix of z^n - c1 z^(n-1) - ... - cn;
/// < 1 means the matching AR polynomial is stationary. Exposed for tests.
double companion_spectral_radius(std::span<const double> coeffs);

} // namespace perpsim
